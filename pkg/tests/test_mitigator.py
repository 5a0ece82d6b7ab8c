"""Tests for quantum pre-processing and classical post-processing."""

import numpy as np
import pytest

from app.exceptions import DimensionMismatchError, InvalidParameterError
from app.quantum.decomposer import decompose_element, decompose_full, spectral_window
from app.quantum.mitigator import (
    MitigationParameters,
    apply_qpp,
    error_bound,
    mitigate,
    mitigate_povm,
    noisy_probability,
    post_process,
    q_value,
    readout_error_rate,
)
from app.quantum.qops import (
    DensityOperator,
    LocalUnitary,
    OutcomeString,
    expectation,
    random_density,
    random_local_unitary,
)
from app.quantum.tomography import PovmElement, ideal_povm

SYDNEY = MitigationParameters(trace_pi=0.9452, epsilon=0.074, eta=0.2711)


def synthetic_element(rng, a="01", eps=0.1, t=0.9):
    """t [(1 - eps) V|a><a|V^dagger + eps P] with known V and P."""
    V = random_local_unitary(2, rng)
    P = random_density(2, rng).matrix
    phi = V.matrix[:, OutcomeString.parse(a).index]
    pi = PovmElement(OutcomeString.parse(a), t * ((1 - eps) * np.outer(phi, phi.conj()) + eps * P))
    return pi, V, P


@pytest.mark.parametrize(
    "p_e, expected",
    [(0.3690, 0.39993), (0.8787, 0.98227)],
)
def test_post_process_sydney_values(p_e, expected):
    assert post_process(p_e, SYDNEY) == pytest.approx(expected, abs=1e-5)


def test_post_process_is_identity_without_noise():
    params = MitigationParameters(trace_pi=1.0, epsilon=0.0, eta=0.4)
    assert post_process(0.37, params) == 0.37


def test_post_process_is_not_clamped():
    params = MitigationParameters(trace_pi=1.0, epsilon=0.5, eta=1.0)
    assert post_process(0.1, params) == pytest.approx(-0.8)


def test_parameters_reject_bad_epsilon():
    with pytest.raises(InvalidParameterError):
        MitigationParameters(trace_pi=1.0, epsilon=1.0, eta=0.0)
    with pytest.raises(InvalidParameterError):
        MitigationParameters(trace_pi=0.0, epsilon=0.1, eta=0.0)


def test_error_bound():
    assert error_bound(0.1, 0.2) == pytest.approx(0.02 / 0.9)
    assert error_bound(0.0, 0.5) == 0.0
    with pytest.raises(InvalidParameterError):
        error_bound(-0.1, 0.2)


def test_readout_error_rates(sydney_pi00):
    assert readout_error_rate(sydney_pi00) == pytest.approx(0.1213, abs=1e-12)
    assert readout_error_rate(sydney_pi00, convention="normalized") == pytest.approx(1 - 0.8787 / 0.9452, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        readout_error_rate(sydney_pi00, convention="fancy")
    with pytest.raises(DimensionMismatchError):
        readout_error_rate(sydney_pi00, "000")


def test_published_error_rates(sydney_pi00_qpp, rigetti_pi00):
    assert readout_error_rate(sydney_pi00_qpp) == pytest.approx(0.1201, abs=1e-4)
    assert readout_error_rate(rigetti_pi00) == pytest.approx(0.2605, abs=1e-3)


def test_apply_qpp_rotates_state():
    V = LocalUnitary.from_angles(np.array([0.0, np.pi, 0.0, 0.0, 0.0, 0.0]))
    rotated = apply_qpp(DensityOperator.basis("00"), V)
    np.testing.assert_allclose(rotated.matrix, DensityOperator.basis("10").matrix, atol=1e-12)


def test_apply_qpp_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply_qpp(DensityOperator.basis("0"), LocalUnitary.identity(2))


def test_noisy_probability_matches_expectation(rng, sydney_pi00):
    rho = random_density(2, rng)
    V = random_local_unitary(2, rng)
    U = V.matrix
    direct = expectation(rho, U.conj().T @ sydney_pi00.matrix @ U)
    assert noisy_probability(rho, sydney_pi00, V) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("seed", range(200))
def test_synthetic_element_recovery_and_bound(seed):
    rng = np.random.default_rng(seed)
    eps = float(rng.uniform(0.0, 0.5))
    t = float(rng.uniform(0.6, 1.0))
    a = "".join(rng.choice(["0", "1"], size=2))
    pi, V, P = synthetic_element(rng, a=a, eps=eps, t=t)
    rho = random_density(2, rng)
    U = V.matrix
    p0 = rho.matrix[OutcomeString.parse(a).index, OutcomeString.parse(a).index].real
    p_e = noisy_probability(rho, pi, V)

    q = expectation(rho, U.conj().T @ P @ U)
    exact = MitigationParameters(trace_pi=t, epsilon=eps, eta=q, V=V)
    assert post_process(p_e, exact) == pytest.approx(p0, abs=1e-10)

    window = spectral_window(P)
    centred = MitigationParameters(trace_pi=t, epsilon=eps, eta=window.q_c, V=V)
    assert abs(post_process(p_e, centred) - p0) <= error_bound(eps, window.delta) + 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_error_bound_is_saturated_along_extreme_eigenvectors(seed):
    rng = np.random.default_rng(seed)
    eps, t = float(rng.uniform(0.05, 0.5)), float(rng.uniform(0.6, 1.0))
    pi, V, P = synthetic_element(rng, eps=eps, t=t)
    window = spectral_window(P)
    bound = error_bound(eps, window.delta)
    params = MitigationParameters(trace_pi=t, epsilon=eps, eta=window.q_c, V=V)
    U = V.matrix
    _, vectors = np.linalg.eigh(P)
    a = OutcomeString.parse("01").index
    for e in (vectors[:, 0], vectors[:, -1]):
        rho = DensityOperator.pure(U.conj().T @ e)
        error = abs(post_process(noisy_probability(rho, pi, V), params) - rho.matrix[a, a].real)
        assert error >= 0.9 * bound
        assert error <= bound + 1e-12


def test_error_bound_holds_over_states(rng):
    pi = PovmElement(OutcomeString.parse("00"), random_density(2, rng).matrix * 0.9)
    dec = decompose_element(pi, starts=4, max_evals=600, seed=1)
    for _ in range(100):
        report = mitigate(random_density(2, rng), pi, dec)
        assert abs(report.p0_eta - report.true_p0) <= report.bound + 1e-9


def test_q_value_stays_inside_spectral_window(rng):
    pi = PovmElement(OutcomeString.parse("00"), random_density(2, rng).matrix * 0.9)
    dec = decompose_element(pi, starts=4, max_evals=600, seed=1)
    for _ in range(20):
        q = q_value(random_density(2, rng), dec)
        assert dec.b_minus - 1e-9 <= q <= dec.b_plus + 1e-9


def test_mitigate_reports_error_rates(sydney_pi00):
    dec = decompose_element(sydney_pi00, starts=4, max_evals=600, seed=7)
    report = mitigate(DensityOperator.basis("00"), sydney_pi00, dec)
    assert report.error_rate_raw == pytest.approx(0.1213, abs=1e-12)
    assert 0.0 <= report.error_rate_qpp <= 1.0
    assert report.true_p0 == 1.0
    assert report.bound == pytest.approx(error_bound(dec.epsilon, dec.delta))


def test_mitigate_povm_on_ideal_detector(rng):
    povm = ideal_povm(2)
    full = decompose_full(povm, starts=3, max_evals=300)
    rho = random_density(2, rng)
    dist = mitigate_povm(rho, povm, full)
    np.testing.assert_allclose(dist.p0_eta, np.diag(rho.matrix).real, atol=1e-10)
    np.testing.assert_array_equal(dist.bounds, np.zeros(4))
    assert [str(a) for a in dist.outcomes] == ["00", "01", "10", "11"]


def test_mitigate_povm_dimension_mismatch():
    full = decompose_full(ideal_povm(1), starts=2, max_evals=100)
    with pytest.raises(DimensionMismatchError):
        mitigate_povm(DensityOperator.maximally_mixed(2), ideal_povm(2), full)
