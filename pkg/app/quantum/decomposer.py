"""
POVM Decomposer
===============

Splits a noisy effect into a rotated computational projector plus a residual:

    Pi~_a = (1 - eps) V|a><a|V^dagger + eps P,    V = V_1 (x) ... (x) V_n

For a fixed V the smallest feasible eps has a closed form,

    eps = 1 - 1 / <phi| Pi~^{-1} |phi>,    |phi> = V|a>,

and the outer search minimizes eps * delta(P) over product unitaries with a
seeded Nelder-Mead multistart. Since eps * delta(P) equals half the spectral
spread of the residual R = Pi~ - (1 - eps)|phi><phi|, the objective never
divides by eps.

The full-POVM variant shares one V across every outcome and minimizes the sum
of the per-outcome objectives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import optimize

from app.config import settings
from app.exceptions import InvalidParameterError, NotPositiveError
from app.quantum.qops import (
    NUMERIC_TOL,
    LocalUnitary,
    Matrix,
    OutcomeString,
    as_matrix,
    euler_zyz,
    hermitize,
    kron_all,
    operator_schmidt_spectrum,
    partial_transpose,
)
from app.quantum.tomography import Povm, PovmElement

logger = logging.getLogger(__name__)

# Relative eigenvalue cutoff defining the support of a singular element
SUPPORT_TOL = 1e-10
EPS_FLOOR = 1e-12


# ============================================================
# Result types
# ============================================================

class SpectralWindow(NamedTuple):
    b_minus: float
    b_plus: float
    delta: float
    q_c: float


@dataclass(frozen=True)
class OptimizerInfo:
    starts: int
    evaluations: int
    best_start: int
    seed: int
    baseline_objective: float


@dataclass(frozen=True, eq=False)
class ElementDecomposition:
    """
    One outcome's decomposition. ``P`` is None when eps == 0 (``exact``);
    the window fields are then zero.
    """

    outcome: OutcomeString
    epsilon: float
    V: LocalUnitary
    P: Matrix | None
    b_minus: float
    b_plus: float
    delta: float
    q_c: float
    objective: float
    trace_pi: float
    exact: bool = False
    crosstalk: bool | None = None
    optimizer: OptimizerInfo | None = None

    def reconstruct(self) -> Matrix:
        """(1 - eps) V|a><a|V^dagger + eps P, the normalized element."""
        phi = self.V.matrix[:, self.outcome.index]
        M = (1 - self.epsilon) * np.outer(phi, phi.conj())
        if self.P is not None:
            M = M + self.epsilon * self.P
        return M


@dataclass(frozen=True, eq=False)
class FullDecomposition:
    V: LocalUnitary
    elements: Tuple[ElementDecomposition, ...]
    objective: float
    optimizer: OptimizerInfo | None = None

    def element(self, outcome: "str | OutcomeString") -> ElementDecomposition:
        return self.elements[OutcomeString.parse(outcome).index]


@dataclass(frozen=True)
class CrosstalkReport:
    crosstalk: bool
    spectra: Dict[Tuple[int, ...], np.ndarray] = field(default_factory=dict)

    @property
    def ratios(self) -> Dict[Tuple[int, ...], float]:
        """Second over first singular value per cut."""
        return {cut: float(s[1] / s[0]) if s[0] > 0 else 0.0 for cut, s in self.spectra.items()}


@dataclass(frozen=True)
class PptResult:
    split: Tuple[int, ...]
    ppt: bool
    min_eigenvalue: float


# ============================================================
# Inner solve
# ============================================================

def normalize_element(pi: PovmElement) -> Tuple[Matrix, float]:
    """
    Return (Pi / tr Pi, tr Pi).

    Elements published already normalized carry ``reported_trace``; their
    matrix is returned unchanged together with that trace.
    """
    if pi.reported_trace is not None:
        return pi.matrix.copy(), float(pi.reported_trace)
    tr = pi.trace
    if tr <= EPS_FLOOR:
        raise InvalidParameterError(f"element {pi.outcome} has near-zero trace {tr:.3e}")
    return pi.matrix / tr, tr


def _epsilon_for_phi(eigvals: np.ndarray, eigvecs: Matrix, phi: np.ndarray) -> float:
    scale = max(float(eigvals[-1]), EPS_FLOOR)
    support = eigvals > SUPPORT_TOL * scale
    c = eigvecs.conj().T @ phi
    outside = float(np.sum(np.abs(c[~support]) ** 2))
    if outside > SUPPORT_TOL:
        return 1.0
    s = float(np.sum(np.abs(c[support]) ** 2 / eigvals[support]))
    if s <= 0:
        return 1.0
    return float(np.clip(1.0 - 1.0 / s, 0.0, 1.0))


def min_epsilon_for_unitary(
    pi_tilde: Matrix,
    V: LocalUnitary,
    a: "str | OutcomeString",
) -> Tuple[float, Matrix | None]:
    """
    Smallest eps keeping pi_tilde - (1 - eps) V|a><a|V^dagger PSD, and P = R/eps.

    Singular pi_tilde is handled on its support; weight of V|a> outside the
    support forces eps = 1. P is None when eps is zero.

    Raises:
        NotPositiveError: If pi_tilde has an eigenvalue below -1e-8
    """
    a = OutcomeString.parse(a)
    M = hermitize(pi_tilde)
    w, U = np.linalg.eigh(M)
    if w[0] < -NUMERIC_TOL:
        raise NotPositiveError(f"normalized element has eigenvalue {w[0]:.3e} < 0")
    w = np.clip(w, 0.0, None)
    phi = V.matrix[:, a.index]
    eps = _epsilon_for_phi(w, U, phi)
    if eps <= EPS_FLOOR:
        return 0.0, None
    R = M - (1 - eps) * np.outer(phi, phi.conj())
    return eps, hermitize(R / eps)


def spectral_window(P: Matrix) -> SpectralWindow:
    """Extremes of tr[rho P] over states, i.e. the extreme eigenvalues of P."""
    w = np.linalg.eigvalsh(hermitize(as_matrix(P)))
    b_minus, b_plus = float(w[0]), float(w[-1])
    return SpectralWindow(b_minus, b_plus, (b_plus - b_minus) / 2, (b_plus + b_minus) / 2)


def _build_element(
    pi_tilde: Matrix,
    trace_pi: float,
    V: LocalUnitary,
    a: OutcomeString,
    crosstalk: bool | None = None,
    optimizer: OptimizerInfo | None = None,
) -> ElementDecomposition:
    eps, P = min_epsilon_for_unitary(pi_tilde, V, a)
    if P is None:
        return ElementDecomposition(
            outcome=a, epsilon=0.0, V=V, P=None, b_minus=0.0, b_plus=0.0, delta=0.0, q_c=0.0,
            objective=0.0, trace_pi=trace_pi, exact=True, crosstalk=crosstalk, optimizer=optimizer,
        )
    win = spectral_window(P)
    return ElementDecomposition(
        outcome=a, epsilon=eps, V=V, P=P, b_minus=win.b_minus, b_plus=win.b_plus,
        delta=win.delta, q_c=win.q_c, objective=eps * win.delta, trace_pi=trace_pi,
        crosstalk=crosstalk, optimizer=optimizer,
    )


# ============================================================
# Outer search
# ============================================================

def _phi_from_angles(x: np.ndarray, bits: Sequence[int]) -> np.ndarray:
    cols = [euler_zyz(*x[3 * j:3 * j + 3])[:, b] for j, b in enumerate(bits)]
    return kron_all(cols)


def _residual_spread(w: np.ndarray, U: Matrix, pi_tilde: Matrix, phi: np.ndarray) -> float:
    eps = _epsilon_for_phi(w, U, phi)
    if eps <= EPS_FLOOR:
        return 0.0
    R = pi_tilde - (1 - eps) * np.outer(phi, phi.conj())
    r = np.linalg.eigvalsh(hermitize(R))
    return 0.5 * float(r[-1] - r[0])


def _optimizer_settings(
    starts: int | None, max_evals: int | None, tol: float | None, seed: int | None
) -> Tuple[int, int, float, int]:
    """Fill unset optimizer options from settings; explicit counts must be at least 1."""
    starts = settings.OPTIMIZER_STARTS if starts is None else starts
    max_evals = settings.OPTIMIZER_MAX_EVALS if max_evals is None else max_evals
    if starts < 1:
        raise InvalidParameterError(f"starts must be at least 1, got {starts}")
    if max_evals < 1:
        raise InvalidParameterError(f"max_evals must be at least 1, got {max_evals}")
    tol = tol if tol is not None else settings.OPTIMIZER_TOL
    seed = seed if seed is not None else settings.DEFAULT_SEED
    return starts, max_evals, tol, seed


def _multistart(
    objective: Callable[[np.ndarray], float],
    dim: int,
    starts: int,
    max_evals: int,
    tol: float,
    seed: int,
) -> Tuple[np.ndarray, float, OptimizerInfo]:
    """
    Nelder-Mead from the identity (all angles zero) plus seeded random starts.

    Ties keep the earliest start.
    """
    streams = np.random.SeedSequence(seed).spawn(starts)
    baseline = objective(np.zeros(dim))
    best_x, best_f, best_k, evaluations = np.zeros(dim), baseline, 0, 1

    for k, stream in enumerate(streams):
        x0 = np.zeros(dim) if k == 0 else np.random.default_rng(stream).uniform(0.0, 2 * np.pi, dim)
        simplex = np.vstack([x0, x0 + 0.2 * np.eye(dim)])
        res = optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxfev": max_evals, "xatol": 1e-8, "fatol": tol, "initial_simplex": simplex},
        )
        evaluations += int(res.nfev)
        logger.debug(f"start {k}: objective={res.fun:.8f} nfev={res.nfev}")
        if res.fun < best_f:
            best_x, best_f, best_k = np.asarray(res.x), float(res.fun), k

    info = OptimizerInfo(
        starts=starts, evaluations=evaluations, best_start=best_k, seed=seed, baseline_objective=float(baseline),
    )
    return best_x, best_f, info


def decompose_element(
    pi: PovmElement,
    *,
    outcome: "str | OutcomeString | None" = None,
    starts: int | None = None,
    max_evals: int | None = None,
    tol: float | None = None,
    seed: int | None = None,
) -> ElementDecomposition:
    """
    Minimize eps * delta(P) over product unitaries for one effect.

    The identity is always one of the starts, so the result is never worse
    than the V = I baseline. Deterministic for a fixed seed.

    Args:
        pi: Effect to decompose
        outcome: Outcome whose projector is rotated (defaults to pi.outcome)
        starts, max_evals, tol, seed: Optimizer settings (default from settings)
    """
    starts, max_evals, tol, seed = _optimizer_settings(starts, max_evals, tol, seed)
    a = OutcomeString.parse(outcome) if outcome is not None else pi.outcome

    pi_tilde, trace_pi = normalize_element(pi)
    pi_tilde = hermitize(pi_tilde)
    w, U = np.linalg.eigh(pi_tilde)
    if w[0] < -NUMERIC_TOL:
        raise NotPositiveError(f"normalized element has eigenvalue {w[0]:.3e} < 0")
    w = np.clip(w, 0.0, None)

    def objective(x: np.ndarray) -> float:
        return _residual_spread(w, U, pi_tilde, _phi_from_angles(x, a.bits))

    x, best, info = _multistart(objective, 3 * a.n, starts, max_evals, tol, seed)
    if not np.isfinite(best):
        raise InvalidParameterError("optimizer found no feasible point")
    crosstalk = detect_crosstalk(pi).crosstalk if a.n >= 2 else None
    result = _build_element(pi_tilde, trace_pi, LocalUnitary.from_angles(x), a, crosstalk, info)
    logger.info(
        f"Decomposed element {a}: eps={result.epsilon:.4f} delta={result.delta:.4f} "
        f"objective={result.objective:.5f} (baseline {info.baseline_objective:.5f}, "
        f"start {info.best_start}, {info.evaluations} evaluations)"
    )
    return result


def evaluate_full(povm: Povm, V: LocalUnitary) -> FullDecomposition:
    """Per-outcome minimal eps for a shared V, with the summed objective."""
    elements = []
    for e in povm.elements:
        pi_tilde, trace_pi = normalize_element(e)
        elements.append(_build_element(pi_tilde, trace_pi, V, e.outcome))
    return FullDecomposition(V=V, elements=tuple(elements), objective=sum(d.objective for d in elements))


def decompose_full(
    povm: Povm,
    *,
    starts: int | None = None,
    max_evals: int | None = None,
    tol: float | None = None,
    seed: int | None = None,
) -> FullDecomposition:
    """Minimize sum_a eps_a * delta(P_a) over one outcome-independent product V."""
    starts, max_evals, tol, seed = _optimizer_settings(starts, max_evals, tol, seed)

    prepared = []
    for e in povm.elements:
        pi_tilde, _ = normalize_element(e)
        pi_tilde = hermitize(pi_tilde)
        w, U = np.linalg.eigh(pi_tilde)
        prepared.append((np.clip(w, 0.0, None), U, pi_tilde, e.outcome.bits))

    def objective(x: np.ndarray) -> float:
        return sum(_residual_spread(w, U, M, _phi_from_angles(x, bits)) for w, U, M, bits in prepared)

    x, best, info = _multistart(objective, 3 * povm.n_qubits, starts, max_evals, tol, seed)
    full = evaluate_full(povm, LocalUnitary.from_angles(x))
    logger.info(f"Full decomposition: objective={full.objective:.5f} (baseline {info.baseline_objective:.5f})")
    return FullDecomposition(V=full.V, elements=full.elements, objective=full.objective, optimizer=info)


# ============================================================
# Crosstalk and PPT
# ============================================================

def _single_qubit_cuts(n: int) -> List[Tuple[int, ...]]:
    return [(0,)] if n == 2 else [(q,) for q in range(n)]


def detect_crosstalk(pi: "PovmElement | Matrix", rel_tol: float | None = None) -> CrosstalkReport:
    """
    Flag effects that do not factorize across any single-qubit cut.

    Crosstalk iff the second operator-Schmidt singular value exceeds
    rel_tol times the first on some cut.
    """
    rel_tol = rel_tol if rel_tol is not None else settings.CROSSTALK_REL_TOL
    M = pi.matrix if isinstance(pi, PovmElement) else as_matrix(pi)
    n = M.shape[0].bit_length() - 1
    if n < 2:
        raise InvalidParameterError("crosstalk needs at least two qubits")
    spectra = {cut: operator_schmidt_spectrum(M, cut) for cut in _single_qubit_cuts(n)}
    crosstalk = any(s.size > 1 and s[1] > rel_tol * s[0] for s in spectra.values())
    return CrosstalkReport(crosstalk=crosstalk, spectra=spectra)


def ppt_check(P: Matrix, split: Sequence[int]) -> PptResult:
    """NPT iff the partial transpose over ``split`` has an eigenvalue below -1e-8."""
    PT = partial_transpose(hermitize(as_matrix(P)), split)
    m = float(np.linalg.eigvalsh(hermitize(PT))[0])
    return PptResult(split=tuple(sorted(split)), ppt=m >= -NUMERIC_TOL, min_eigenvalue=m)


def all_ppt_splits(P: Matrix) -> List[PptResult]:
    """ppt_check on every one-qubit-versus-rest split."""
    n = as_matrix(P).shape[0].bit_length() - 1
    return [ppt_check(P, cut) for cut in _single_qubit_cuts(n)]
