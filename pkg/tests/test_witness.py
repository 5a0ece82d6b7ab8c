"""Tests for witness construction, separability windows and verdicts."""

import numpy as np
import pytest

from app.exceptions import InvalidParameterError, NotPositiveError, NumericalValidationError
from app.quantum.mitigator import MitigationParameters, post_process
from app.quantum.qops import DensityOperator, partial_trace, random_density, werner_state
from app.quantum.witness import (
    ENTANGLED_ABOVE,
    ENTANGLED_BELOW,
    INCONCLUSIVE,
    WitnessOperator,
    build_paper_witness,
    certify,
    detection_threshold,
    dilation_probability,
    eta_window,
    measurement_dilation,
    mitigated_bounds,
    ppt_threshold,
    probability_form,
    purification_unitary,
    separability_bounds,
    sweep,
    werner_probability,
)


def test_paper_witness_is_a_state():
    witness = build_paper_witness()
    np.testing.assert_allclose(np.linalg.eigvalsh(witness.W), [0.0, 0.25, 0.25, 0.5], atol=1e-12)
    assert witness.window == (0.125, 0.375)


def test_witness_operator_validation():
    with pytest.raises(InvalidParameterError):
        WitnessOperator(np.eye(4), 0.1, 0.2)
    with pytest.raises(NotPositiveError):
        WitnessOperator(np.diag([1.5, -0.5]), 0.1, 0.2)
    with pytest.raises(InvalidParameterError):
        WitnessOperator(np.eye(4) / 4, 0.3, 0.2)


@pytest.mark.parametrize(
    "name, r, expected",
    [
        ("phi_plus", 0.0, 0.0),
        ("psi_minus", 0.0, 0.5),
        ("phi_plus", 1.0, 0.25),
        ("psi_minus", 0.4, 0.4),
    ],
)
def test_werner_probabilities(name, r, expected):
    assert werner_probability(name, r) == pytest.approx(expected, abs=1e-12)


def test_hard_coded_window_is_recovered_numerically():
    bounds = separability_bounds(build_paper_witness(), starts=8, seed=3)
    assert bounds.B_L == pytest.approx(0.125, abs=1e-6)
    assert bounds.B_U == pytest.approx(0.375, abs=1e-6)
    assert bounds.gap_lower <= 1e-6
    assert bounds.gap_upper <= 1e-6


def test_separability_bounds_of_maximally_mixed():
    bounds = separability_bounds(np.eye(4) / 4, starts=2, grid=8)
    assert bounds.B_L == pytest.approx(0.25)
    assert bounds.B_U == pytest.approx(0.25)


def test_separability_bounds_two_qubits_only():
    with pytest.raises(InvalidParameterError):
        separability_bounds(np.eye(8) / 8, starts=1)


def test_product_states_stay_inside_window(rng):
    witness = build_paper_witness()
    for _ in range(50):
        sigma = np.kron(random_density(1, rng).matrix, random_density(1, rng).matrix)
        assert certify(float(np.trace(witness.W @ sigma).real), witness.window).verdict == INCONCLUSIVE


def test_purification_traces_back_to_witness():
    witness = build_paper_witness()
    U = purification_unitary(witness)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(16), atol=1e-10)
    zero = np.zeros((16, 16), dtype=complex)
    zero[0, 0] = 1.0
    np.testing.assert_allclose(partial_trace(U @ zero @ U.conj().T, [0, 1]), witness.W, atol=1e-10)


def test_probability_form_matches_trace(rng):
    witness = build_paper_witness()
    U = purification_unitary(witness)
    for _ in range(10):
        rho = random_density(2, rng)
        assert probability_form(witness, rho, U) == pytest.approx(np.trace(witness.W @ rho.matrix).real, abs=1e-10)


def test_probability_form_detects_wrong_unitary():
    with pytest.raises(NumericalValidationError):
        probability_form(build_paper_witness(), DensityOperator.basis("00"), np.eye(16))


def test_measurement_dilation(rng):
    witness = build_paper_witness()
    G = measurement_dilation(witness)
    np.testing.assert_allclose(G.conj().T @ G, np.eye(16), atol=1e-10)
    for name, r in [("phi_plus", 0.0), ("psi_minus", 0.2)]:
        assert dilation_probability(G, werner_state(name, r)) == pytest.approx(werner_probability(name, r), abs=1e-10)
    rho = random_density(2, rng)
    assert dilation_probability(G, rho) == pytest.approx(np.trace(witness.W @ rho.matrix).real, abs=1e-10)


def test_mitigated_bounds_sydney():
    lo, hi = mitigated_bounds(0.125, 0.375, 0.9452, 0.074, 0.2711)
    assert lo == pytest.approx(0.121151, abs=1e-6)
    assert hi == pytest.approx(0.406782, abs=1e-6)


def test_mitigated_bounds_without_noise_are_unchanged():
    assert mitigated_bounds(0.125, 0.375, 1.0, 0.0, 0.3) == pytest.approx((0.125, 0.375))


def test_eta_window_sydney():
    lo, hi = eta_window(0.125, 0.375, 0.9452, 0.074)
    assert lo == pytest.approx(0.22293, abs=1e-5)
    assert hi == pytest.approx(0.66880, abs=1e-5)
    assert lo < 0.2711 < hi


def test_eta_window_shrinks_with_kappa():
    wide = eta_window(0.125, 0.375, 0.9452, 0.074)
    narrow = eta_window(0.125, 0.375, 0.9452, 0.074, kappa=0.001)
    assert wide[0] < narrow[0] < narrow[1] < wide[1]
    assert eta_window(0.125, 0.375, 0.9452, 0.074, kappa=0.1) is None


def test_eta_window_rejects_noiseless_detector():
    with pytest.raises(InvalidParameterError):
        eta_window(0.125, 0.375, 1.0, 0.0)


def test_certify_verdicts():
    below = certify(0.1, (0.125, 0.375))
    assert below.verdict == ENTANGLED_BELOW
    assert below.margin == pytest.approx(0.025)
    assert certify(0.4, (0.125, 0.375)).verdict == ENTANGLED_ABOVE
    assert certify(0.2, (0.125, 0.375)).verdict == INCONCLUSIVE
    assert not certify(0.125, (0.125, 0.375)).entangled
    with pytest.raises(InvalidParameterError):
        certify(0.2, (0.4, 0.1))


def test_noiseless_thresholds():
    assert detection_threshold("phi_plus") == pytest.approx(0.50)
    assert detection_threshold("psi_minus") == pytest.approx(0.50)
    assert ppt_threshold("phi_plus") == pytest.approx(0.67)
    assert ppt_threshold("psi_minus") == pytest.approx(0.67)


def test_sweep_rows():
    rows = sweep("psi_minus", step=0.25)
    assert [r for r, _, _ in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert rows[0][2] == ENTANGLED_ABOVE
    assert rows[-1][2] == INCONCLUSIVE


def test_mitigated_bounds_agree_with_post_processing(rng):
    for _ in range(200):
        t, eps, eta = rng.uniform(0.6, 1.0), rng.uniform(0.0, 0.5), rng.uniform(0.0, 1.0)
        B_L, B_U = np.sort(rng.uniform(0.0, 0.6, size=2))
        params = MitigationParameters(trace_pi=t, epsilon=eps, eta=eta)
        lo, hi = mitigated_bounds(B_L, B_U, t, eps, eta)
        assert lo == pytest.approx(post_process(B_L, params), abs=1e-12)
        assert hi == pytest.approx(post_process(B_U, params), abs=1e-12)

        p_e = rng.uniform(0.0, 1.0)
        raw_lo, raw_hi = (1 - eps) * B_L + eps * eta, (1 - eps) * B_U + eps * eta
        if min(abs(p_e / t - raw_lo), abs(p_e / t - raw_hi)) < 1e-9:
            continue
        outside_raw = not raw_lo <= p_e / t <= raw_hi
        assert certify(post_process(p_e, params), (B_L, B_U)).entangled == outside_raw


@pytest.mark.parametrize("kappa", [0.0, 0.005, 0.01])
def test_eta_inside_window_rescues_edge_probabilities(rng, kappa):
    t, eps = 0.9452, 0.074
    B_L, B_U = build_paper_witness().window
    lo, hi = eta_window(B_L, B_U, t, eps, kappa=kappa)
    for _ in range(50):
        eta = rng.uniform(lo + 1e-3, hi - 1e-3)
        params = MitigationParameters(trace_pi=t, epsilon=eps, eta=eta)
        below = rng.uniform(B_L - 0.05, B_L + kappa)
        above = rng.uniform(B_U - kappa, B_U + 0.05)
        assert certify(post_process(below, params), (B_L, B_U)).verdict == ENTANGLED_BELOW
        assert certify(post_process(above, params), (B_L, B_U)).verdict == ENTANGLED_ABOVE


def test_eta_window_closes_for_large_kappa():
    # Sydney parameters leave room for kappa below c (B_U - B_L) t / 2, about 0.0156
    assert eta_window(0.125, 0.375, 0.9452, 0.074, kappa=0.015) is not None
    assert eta_window(0.125, 0.375, 0.9452, 0.074, kappa=0.02) is None
