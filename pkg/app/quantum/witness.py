"""
Entanglement Witness Certification
==================================

A non-negative, unit-trace witness W~ has a separability window [B_L, B_U]:
every separable state gives tr[W~ sigma] inside it, so a probability outside
the window certifies entanglement. Because W~ is a state, the probability
tr[W~ rho] can be measured as the all-zero outcome of a circuit built from a
purification of W~.

With noisy detectors the window is shifted by the post-processing map, and a
constant eta must be chosen inside the detection window for the mitigated
verdict to stay sound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy import optimize

from app.config import settings
from app.exceptions import InvalidParameterError, NotPositiveError, NumericalValidationError
from app.quantum.qops import (
    STRUCT_TOL,
    DensityOperator,
    Matrix,
    as_matrix,
    bell_projector,
    expectation,
    hermitize,
    num_qubits,
    partial_transpose,
    werner_state,
)

logger = logging.getLogger(__name__)

PAPER_WINDOW = (0.125, 0.375)
VERDICT_SLACK = 1e-12

ENTANGLED_BELOW = "entangled_below"
ENTANGLED_ABOVE = "entangled_above"
INCONCLUSIVE = "inconclusive"


# ============================================================
# Types
# ============================================================

@dataclass(frozen=True, eq=False)
class WitnessOperator:
    """Witness state W~ with its separability window [B_L, B_U]."""

    W: Matrix
    B_L: float
    B_U: float

    def __post_init__(self) -> None:
        _check_state_like(self.W)
        if self.B_L > self.B_U:
            raise InvalidParameterError(f"B_L={self.B_L} exceeds B_U={self.B_U}")
        W = hermitize(as_matrix(self.W))
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def window(self) -> Tuple[float, float]:
        return (self.B_L, self.B_U)


@dataclass(frozen=True)
class CertificationVerdict:
    probability: float
    window: Tuple[float, float]
    verdict: str
    margin: float

    @property
    def entangled(self) -> bool:
        return self.verdict != INCONCLUSIVE


class SeparabilityBounds(NamedTuple):
    B_L: float
    B_U: float
    gap_lower: float
    gap_upper: float


def _check_state_like(W: Matrix) -> None:
    A = as_matrix(W)
    num_qubits(A)
    if abs(np.trace(A).real - 1.0) > STRUCT_TOL:
        raise InvalidParameterError(f"witness trace is {np.trace(A).real:.12f}, expected 1")
    if np.linalg.eigvalsh(hermitize(A))[0] < -STRUCT_TOL:
        raise NotPositiveError("witness operator is not positive semidefinite")


# ============================================================
# Witness construction and window
# ============================================================

def build_paper_witness() -> WitnessOperator:
    """W~ = 1/4 phi- + 1/4 psi+ + 1/2 psi-, window (1/8, 3/8)."""
    W = 0.25 * bell_projector("phi_minus") + 0.25 * bell_projector("psi_plus") + 0.5 * bell_projector("psi_minus")
    return WitnessOperator(W, *PAPER_WINDOW)


def _bloch_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _conditional(T: np.ndarray, theta: float, phi: float) -> Matrix:
    u = _bloch_ket(theta, phi)
    return np.einsum("i,ijkl,k->jl", u.conj(), T, u)


def separability_bounds(
    W: "WitnessOperator | Matrix",
    *,
    starts: int | None = None,
    seed: int | None = None,
    grid: int = 48,
) -> SeparabilityBounds:
    """
    Min and max of tr[W (u (x) v)] over two-qubit product pure states.

    For fixed |u> the optimum over |v> is an extreme eigenvalue of
    <u|W|u>, so only the first Bloch sphere is searched (seeded Nelder-Mead
    multistart). The gaps compare against a dense grid over the same sphere
    and are zero when the optimizer did at least as well.
    """
    starts = starts or settings.WITNESS_STARTS
    seed = seed if seed is not None else settings.DEFAULT_SEED
    M = W.W if isinstance(W, WitnessOperator) else hermitize(as_matrix(W))
    if num_qubits(M) != 2:
        raise InvalidParameterError("separability bounds are supported for two-qubit witnesses only")
    _check_state_like(M)
    T = M.reshape(2, 2, 2, 2)

    def lowest(x: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(hermitize(_conditional(T, *x)))[0])

    def neg_highest(x: np.ndarray) -> float:
        return -float(np.linalg.eigvalsh(hermitize(_conditional(T, *x)))[-1])

    rng = np.random.default_rng(seed)
    lo, hi = np.inf, -np.inf
    for _ in range(starts):
        x0 = np.array([np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)])
        lo = min(lo, optimize.minimize(lowest, x0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12}).fun)
        hi = max(hi, -optimize.minimize(neg_highest, x0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12}).fun)

    thetas = np.linspace(0, np.pi, grid)
    phis = np.linspace(0, 2 * np.pi, 2 * grid, endpoint=False)
    grid_vals = [np.linalg.eigvalsh(hermitize(_conditional(T, t, p))) for t in thetas for p in phis]
    grid_lo = min(v[0] for v in grid_vals)
    grid_hi = max(v[-1] for v in grid_vals)

    result = SeparabilityBounds(float(lo), float(hi), max(0.0, float(lo - grid_lo)), max(0.0, float(grid_hi - hi)))
    logger.info(f"Separability window: [{result.B_L:.6f}, {result.B_U:.6f}] over {starts} starts")
    return result


# ============================================================
# Purification and dilation
# ============================================================

def purification_unitary(W: "WitnessOperator | Matrix") -> Matrix:
    """
    Unitary on 2n qubits whose first column is sum_i sqrt(l_i)|e_i>|i>.

    Tracing the last n qubits out of U|0..0><0..0|U^dagger returns W. The
    completion is QR of [v | I] with the first column pinned to v.
    """
    M = W.W if isinstance(W, WitnessOperator) else as_matrix(W)
    _check_state_like(M)
    d = M.shape[0]
    w, E = np.linalg.eigh(hermitize(M))
    v = (E * np.sqrt(np.clip(w, 0.0, None))).reshape(-1)
    v = v / np.linalg.norm(v)
    Q, R = np.linalg.qr(np.column_stack([v, np.eye(d * d)]))
    Q[:, 0] *= R[0, 0]
    return Q


def probability_form(
    W: "WitnessOperator | Matrix",
    rho: "DensityOperator | Matrix",
    U: Matrix | None = None,
) -> float:
    """
    <0..0| U^dagger (rho (x) I) U |0..0>, checked against tr[W rho].

    Raises:
        NumericalValidationError: If the two disagree by more than 1e-10
    """
    M = W.W if isinstance(W, WitnessOperator) else as_matrix(W)
    U = purification_unitary(M) if U is None else U
    r = as_matrix(rho)
    d = r.shape[0]
    u0 = U[:, 0]
    value = float(np.real(u0.conj() @ np.kron(r, np.eye(d)) @ u0))
    direct = expectation(r, M)
    if abs(value - direct) > STRUCT_TOL:
        raise NumericalValidationError(f"purification gives {value:.12f} but tr[W rho] = {direct:.12f}")
    return value


def measurement_dilation(W: "WitnessOperator | Matrix") -> Matrix:
    """
    Unitary G on (ancilla, data), ancilla first, with
    G |0..0>|psi> = |0..00>(x)sqrt(W)|psi> + |0..01>(x)sqrt(I - W)|psi>.

    With ancillas prepared in |0..0>, the all-zero ancilla outcome occurs
    with probability tr[W rho].
    """
    M = hermitize(W.W if isinstance(W, WitnessOperator) else as_matrix(W))
    _check_state_like(M)
    d = M.shape[0]
    w, E = np.linalg.eigh(M)
    w = np.clip(w, 0.0, 1.0)
    sqrt_w = (E * np.sqrt(w)) @ E.conj().T
    sqrt_rest = (E * np.sqrt(1.0 - w)) @ E.conj().T
    J = np.zeros((d * d, d), dtype=complex)
    J[:d] = sqrt_w
    J[d:2 * d] = sqrt_rest
    Q, _ = np.linalg.qr(np.column_stack([J, np.eye(d * d)]))
    Q[:, :d] = J
    return Q


def dilation_probability(G: Matrix, rho: "DensityOperator | Matrix") -> float:
    """All-zero ancilla probability of G applied to |0..0><0..0| (x) rho."""
    r = as_matrix(rho)
    d = r.shape[0]
    anc0 = np.zeros((d, d), dtype=complex)
    anc0[0, 0] = 1.0
    out = G @ np.kron(anc0, r) @ G.conj().T
    return float(np.real(np.trace(out[:d, :d])))


# ============================================================
# Noisy-detector windows and verdicts
# ============================================================

def _check_epsilon(epsilon: float) -> None:
    if not 0.0 <= epsilon < 1.0:
        raise InvalidParameterError(f"epsilon must lie in [0, 1), got {epsilon}")


def mitigated_bounds(B_L: float, B_U: float, trace_pi: float, epsilon: float, eta: float) -> Tuple[float, float]:
    """B^(eta) = B / (trace_pi (1 - eps)) - eps eta / (1 - eps), for both bounds."""
    _check_epsilon(epsilon)
    scale = 1.0 / (trace_pi * (1.0 - epsilon))
    shift = epsilon * eta / (1.0 - epsilon)
    return (scale * B_L - shift, scale * B_U - shift)


def eta_window(
    B_L: float,
    B_U: float,
    trace_pi: float,
    epsilon: float,
    kappa: float = 0.0,
) -> Tuple[float, float] | None:
    """
    Range of eta keeping mitigated verdicts sound; None when empty.

    c = 1/trace_pi - (1 - eps); window = ((c B_L + kappa/trace_pi)/eps, (c B_U - kappa/trace_pi)/eps).
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidParameterError("eta window is undefined for epsilon outside (0, 1)")
    if kappa < 0:
        raise InvalidParameterError("kappa must be non-negative")
    c = 1.0 / trace_pi - (1.0 - epsilon)
    lo = (c * B_L + kappa / trace_pi) / epsilon
    hi = (c * B_U - kappa / trace_pi) / epsilon
    if lo >= hi:
        return None
    return (lo, hi)


def certify(p: float, window: Tuple[float, float]) -> CertificationVerdict:
    """Entangled iff p lies strictly outside the window (1e-12 slack)."""
    B_L, B_U = window
    if B_L > B_U:
        raise InvalidParameterError(f"invalid window ({B_L}, {B_U})")
    if p < B_L - VERDICT_SLACK:
        return CertificationVerdict(p, (B_L, B_U), ENTANGLED_BELOW, B_L - p)
    if p > B_U + VERDICT_SLACK:
        return CertificationVerdict(p, (B_L, B_U), ENTANGLED_ABOVE, p - B_U)
    return CertificationVerdict(p, (B_L, B_U), INCONCLUSIVE, min(p - B_L, B_U - p))


def werner_probability(name: str, r: float, witness: WitnessOperator | None = None) -> float:
    """tr[W~ rho_name(r)] for the Werner-type state (1 - r)|psi><psi| + r I/4."""
    witness = witness or build_paper_witness()
    return expectation(werner_state(name, r), witness.W)


def _grid(step: float) -> np.ndarray:
    return np.round(np.arange(0.0, 1.0 + step / 2, step), 10)


def detection_threshold(name: str, step: float = 0.01, witness: WitnessOperator | None = None) -> float | None:
    """Smallest r on the grid where the noiseless verdict turns inconclusive."""
    witness = witness or build_paper_witness()
    for r in _grid(step):
        if not certify(werner_probability(name, r, witness), witness.window).entangled:
            return float(r)
    return None


def ppt_threshold(name: str, step: float = 0.01) -> float | None:
    """Smallest r on the grid where the Werner-type state becomes PPT."""
    for r in _grid(step):
        pt = partial_transpose(werner_state(name, r).matrix, [1])
        if np.linalg.eigvalsh(hermitize(pt))[0] >= -1e-8:
            return float(r)
    return None


def sweep(name: str, step: float = 0.01, witness: WitnessOperator | None = None) -> List[Tuple[float, float, str]]:
    """(r, p, verdict) along the Werner family; the data behind the window plot."""
    witness = witness or build_paper_witness()
    rows = []
    for r in _grid(step):
        p = werner_probability(name, r, witness)
        rows.append((float(r), p, certify(p, witness.window).verdict))
    return rows
