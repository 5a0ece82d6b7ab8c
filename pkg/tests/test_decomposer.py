"""Tests for the POVM element decomposition, crosstalk detection and PPT checks."""

import numpy as np
import pytest

from app.exceptions import InvalidParameterError
from app.quantum.decomposer import (
    all_ppt_splits,
    decompose_element,
    decompose_full,
    detect_crosstalk,
    evaluate_full,
    min_epsilon_for_unitary,
    normalize_element,
    ppt_check,
    spectral_window,
)
from app.quantum.qops import (
    LocalUnitary,
    OutcomeString,
    basis_projector,
    bell_projector,
    kron_all,
    random_density,
    random_local_unitary,
)
from app.quantum.tomography import PovmElement, confusion_povm, ideal_povm

FAST = dict(starts=6, max_evals=800)


def residual_min_eig(pi_tilde, V, a, eps):
    phi = V.matrix[:, OutcomeString.parse(a).index]
    R = pi_tilde - (1 - eps) * np.outer(phi, phi.conj())
    return np.linalg.eigvalsh((R + R.conj().T) / 2)[0]


def bisect_epsilon(pi_tilde, V, a, iterations=80):
    lo, hi = 0.0, 1.0
    if residual_min_eig(pi_tilde, V, a, 0.0) >= 0:
        return 0.0
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if residual_min_eig(pi_tilde, V, a, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def random_product_effect(rng, n=2):
    singles = []
    for _ in range(n):
        A = random_density(1, rng).matrix
        singles.append(A / np.linalg.eigvalsh(A)[-1] * rng.uniform(0.3, 1.0))
    return PovmElement(OutcomeString.parse("0" * n), kron_all(singles))


# ============================================================
# Normalization and inner solve
# ============================================================

def test_normalize_sydney(sydney_pi00):
    pi_tilde, trace = normalize_element(sydney_pi00)
    assert trace == pytest.approx(0.9452, abs=1e-12)
    assert np.trace(pi_tilde).real == pytest.approx(1.0)


def test_normalize_uses_reported_trace(rigetti_pi00):
    pi_tilde, trace = normalize_element(rigetti_pi00)
    assert trace == 0.8742
    np.testing.assert_array_equal(pi_tilde, rigetti_pi00.matrix)


def test_normalize_ideal(ideal_pi00):
    pi_tilde, trace = normalize_element(ideal_pi00)
    assert trace == 1.0
    np.testing.assert_allclose(pi_tilde, basis_projector("00"))


def test_normalize_rejects_zero_trace():
    with pytest.raises(InvalidParameterError):
        normalize_element(PovmElement(OutcomeString.parse("0"), np.zeros((2, 2))))


def test_noiseless_element_has_zero_epsilon():
    eps, P = min_epsilon_for_unitary(basis_projector("01"), LocalUnitary.identity(2), "01")
    assert eps == 0.0
    assert P is None


def test_depolarized_element():
    lam, d = 0.2, 4
    pi_tilde = (1 - lam) * basis_projector("00") + lam / d * np.eye(d)
    eps, P = min_epsilon_for_unitary(pi_tilde, LocalUnitary.identity(2), "00")
    assert eps == pytest.approx(lam * (d - 1) / d, abs=1e-12)
    assert np.trace(P).real == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.eigvalsh(P)[0] >= -1e-8


def test_outside_support_forces_full_epsilon():
    eps, P = min_epsilon_for_unitary(basis_projector("11"), LocalUnitary.identity(2), "00")
    assert eps == 1.0
    np.testing.assert_allclose(P, basis_projector("11"), atol=1e-12)


def test_inner_solve_matches_bisection(rng):
    for _ in range(100):
        pi_tilde = random_density(2, rng).matrix
        V = random_local_unitary(2, rng)
        eps, _ = min_epsilon_for_unitary(pi_tilde, V, "10")
        assert eps == pytest.approx(bisect_epsilon(pi_tilde, V, "10"), abs=1e-8)


def test_residual_feasibility_is_monotone(rng):
    pi_tilde = random_density(2, rng).matrix
    V = random_local_unitary(2, rng)
    eps, _ = min_epsilon_for_unitary(pi_tilde, V, "00")
    for larger in np.linspace(eps, 1.0, 12):
        assert residual_min_eig(pi_tilde, V, "00", larger) >= -1e-9


def test_sydney_published_unitary_is_feasible(sydney_pi00, sydney_v):
    pi_tilde, _ = normalize_element(sydney_pi00)
    eps, P = min_epsilon_for_unitary(pi_tilde, sydney_v, "00")
    assert eps <= 0.0740 + 5e-3
    window = spectral_window(P)
    # printed four-digit V: the residual is singular at minimal eps, b_plus lands near 0.557 (published 0.5308)
    assert window.b_minus == pytest.approx(0.0, abs=1e-6)
    assert window.b_plus == pytest.approx(0.557, abs=5e-3)
    assert window.q_c == pytest.approx(window.delta, abs=1e-6)
    assert window.b_minus <= 0.2711 <= window.b_plus


def test_sydney_published_epsilon_leaves_negative_residual(sydney_pi00, sydney_v):
    pi_tilde, _ = normalize_element(sydney_pi00)
    phi = sydney_v.matrix[:, 0]
    residual = pi_tilde - (1 - 0.0740) * np.outer(phi, phi.conj())
    assert np.linalg.eigvalsh((residual + residual.conj().T) / 2)[0] < -1e-3


# ============================================================
# Spectral window
# ============================================================

def test_spectral_window_of_maximally_mixed():
    assert spectral_window(np.eye(4) / 4) == pytest.approx((0.25, 0.25, 0.0, 0.25))


def test_spectral_window_of_diagonal():
    assert spectral_window(np.diag([0.0, 1.0])) == pytest.approx((0.0, 1.0, 0.5, 0.5))


# ============================================================
# Outer search
# ============================================================

def test_decompose_ideal_element(ideal_pi00):
    dec = decompose_element(ideal_pi00, **FAST)
    assert dec.epsilon == 0.0
    assert dec.objective == 0.0
    assert dec.exact


def test_reconstruction_identity(rng):
    pi = PovmElement(OutcomeString.parse("00"), random_density(2, rng).matrix * 0.9)
    dec = decompose_element(pi, seed=3, **FAST)
    pi_tilde, _ = normalize_element(pi)
    assert np.max(np.abs(dec.reconstruct() - pi_tilde)) <= 1e-8
    assert np.trace(dec.P).real == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.eigvalsh(dec.P)[0] >= -1e-8
    assert dec.delta == pytest.approx((dec.b_plus - dec.b_minus) / 2, abs=1e-12)
    assert dec.objective == pytest.approx(dec.epsilon * dec.delta, abs=1e-12)


def test_never_worse_than_identity(rng):
    for _ in range(3):
        pi = PovmElement(OutcomeString.parse("01"), random_density(2, rng).matrix * 0.8)
        dec = decompose_element(pi, seed=1, **FAST)
        assert dec.objective <= dec.optimizer.baseline_objective + 1e-12


def test_decompose_is_deterministic(sydney_pi00):
    a = decompose_element(sydney_pi00, seed=5, **FAST)
    b = decompose_element(sydney_pi00, seed=5, **FAST)
    assert a.objective == b.objective
    np.testing.assert_array_equal(a.V.matrix, b.V.matrix)


@pytest.mark.parametrize("options", [{"starts": 0}, {"starts": -2}, {"max_evals": 0}])
def test_decompose_rejects_empty_optimizer_budget(ideal_pi00, options):
    with pytest.raises(InvalidParameterError):
        decompose_element(ideal_pi00, **options)
    with pytest.raises(InvalidParameterError):
        decompose_full(ideal_povm(2), **options)


def test_decompose_sydney(sydney_pi00):
    dec = decompose_element(sydney_pi00, seed=7, **FAST)
    assert dec.epsilon <= 0.0790
    assert dec.crosstalk is True
    assert dec.trace_pi == pytest.approx(0.9452)


def test_decompose_rigetti(rigetti_pi00):
    dec = decompose_element(rigetti_pi00)
    assert dec.objective <= 0.2940 * 0.3683 + 0.01
    assert dec.trace_pi == 0.8742


def test_decompose_yorktown(yorktown_pi000):
    dec = decompose_element(yorktown_pi000, starts=8)
    assert dec.objective <= 0.463 * 0.231 + 0.01
    assert dec.optimizer.starts == 8


def test_single_qubit_decomposition_has_no_crosstalk_flag():
    pi = PovmElement(OutcomeString.parse("0"), np.diag([0.95, 0.1]))
    dec = decompose_element(pi, **FAST)
    assert dec.crosstalk is None
    assert dec.epsilon > 0


# ============================================================
# Shared-V variant
# ============================================================

def test_full_decomposition_of_ideal_povm():
    full = decompose_full(ideal_povm(2), **FAST)
    assert all(d.epsilon == 0.0 for d in full.elements)
    assert full.objective == 0.0


def test_confusion_povm_at_identity_has_scalar_epsilons():
    povm = confusion_povm([0.05, 0.05])
    full = evaluate_full(povm, LocalUnitary.identity(2))
    for e, d in zip(povm.elements, full.elements):
        diag = np.diag(e.matrix).real
        assert d.epsilon == pytest.approx(1 - diag[e.outcome.index] / diag.sum(), abs=1e-12)


def test_full_decomposition_never_worse_than_identity():
    povm = confusion_povm([0.05, (0.02, 0.08)])
    baseline = evaluate_full(povm, LocalUnitary.identity(2)).objective
    full = decompose_full(povm, seed=2, **FAST)
    assert full.objective <= baseline + 1e-3
    assert full.element("11").outcome == OutcomeString.parse("11")


# ============================================================
# Crosstalk and PPT
# ============================================================

def test_crosstalk_on_fixtures(rigetti_pi00, yorktown_pi000, sydney_pi00):
    assert detect_crosstalk(rigetti_pi00, 1e-3).crosstalk
    assert detect_crosstalk(yorktown_pi000, 1e-3).crosstalk
    assert detect_crosstalk(sydney_pi00, 1e-3).crosstalk


def test_random_product_elements_are_products(rng):
    for _ in range(100):
        assert not detect_crosstalk(random_product_effect(rng), 1e-3).crosstalk


def test_crosstalk_needs_two_qubits():
    with pytest.raises(InvalidParameterError):
        detect_crosstalk(np.eye(2) / 2)


def test_ppt_checks():
    assert all(r.ppt for r in all_ppt_splits(np.eye(8) / 8))
    result = ppt_check(bell_projector("phi_plus"), [1])
    assert not result.ppt
    assert result.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)


def test_separable_mixture_is_ppt(rng):
    mix = sum(
        w * np.kron(random_density(1, rng).matrix, random_density(1, rng).matrix)
        for w in (0.2, 0.3, 0.5)
    )
    assert ppt_check(mix, [0]).ppt
