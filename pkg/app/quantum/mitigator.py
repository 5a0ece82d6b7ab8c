"""
Two-step readout mitigation.

Quantum pre-processing rotates the state with the decomposition's local
unitary before detection; classical post-processing inverts the affine map

    p_e / tr(Pi) = (1 - eps) p0 + eps q,    q = tr[rho V^dagger P V],

with q replaced by a constant eta (q_c by default). The residual error is at
most eps * delta(P) / (1 - eps).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.exceptions import DimensionMismatchError, InvalidParameterError
from app.quantum.decomposer import ElementDecomposition, FullDecomposition
from app.quantum.qops import (
    STRUCT_TOL,
    DensityOperator,
    LocalUnitary,
    OutcomeString,
    as_matrix,
    expectation,
    num_qubits,
)
from app.quantum.tomography import Povm, PovmElement

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MitigationParameters:
    """Constants of the post-processing map for one outcome."""

    trace_pi: float
    epsilon: float
    eta: float
    V: LocalUnitary | None = None

    def __post_init__(self) -> None:
        if not self.trace_pi > 0:
            raise InvalidParameterError(f"trace_pi must be positive, got {self.trace_pi}")
        _check_epsilon(self.epsilon)

    @classmethod
    def from_decomposition(cls, dec: ElementDecomposition, eta: float | None = None) -> "MitigationParameters":
        return cls(trace_pi=dec.trace_pi, epsilon=dec.epsilon, eta=dec.q_c if eta is None else eta, V=dec.V)


@dataclass(frozen=True)
class MitigationReport:
    p_e: float
    p0_eta: float
    bound: float
    error_rate_raw: float
    error_rate_qpp: float
    true_p0: float | None = None

    def __post_init__(self) -> None:
        if self.bound < 0 or not np.isfinite(self.p0_eta):
            raise InvalidParameterError("mitigation report has a negative bound or non-finite estimate")


@dataclass(frozen=True)
class MitigatedDistribution:
    """Outcome-wise raw and post-processed probabilities for a full POVM."""

    outcomes: Tuple[OutcomeString, ...]
    p_e: np.ndarray
    p0_eta: np.ndarray
    bounds: np.ndarray


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 <= epsilon < 1.0:
        raise InvalidParameterError(f"epsilon must lie in [0, 1), got {epsilon}")


def apply_qpp(rho: DensityOperator, V: LocalUnitary) -> DensityOperator:
    """Pre-processing on the state side: rho -> V rho V^dagger."""
    r = as_matrix(rho)
    if r.shape != V.matrix.shape:
        raise DimensionMismatchError(f"state dimension {r.shape[0]} does not match unitary dimension {V.matrix.shape[0]}")
    U = V.matrix
    return DensityOperator(U @ r @ U.conj().T)


def noisy_probability(rho: DensityOperator, pi: PovmElement, V: LocalUnitary | None = None) -> float:
    """
    Detection probability tr[rho V^dagger Pi V].

    Values outside [0, 1] by at most 1e-8 are clamped; larger violations
    mean the effect is invalid.
    """
    state = apply_qpp(rho, V) if V is not None else rho
    p = expectation(state, pi.matrix)
    if -CLAMP_TOL <= p < 0.0 or 1.0 < p <= 1.0 + CLAMP_TOL:
        if p < -STRUCT_TOL or p > 1.0 + STRUCT_TOL:
            logger.warning(f"Clamping detection probability {p:.3e} for outcome {pi.outcome} into [0, 1]")
        return float(np.clip(p, 0.0, 1.0))
    if p < 0.0 or p > 1.0:
        raise InvalidParameterError(f"detection probability {p:.6f} outside [0, 1]; effect is invalid")
    return p


def post_process(p_e: float, params: MitigationParameters) -> float:
    """p0_eta = (p_e / tr Pi - eps * eta) / (1 - eps); not clamped."""
    _check_epsilon(params.epsilon)
    return (p_e / params.trace_pi - params.epsilon * params.eta) / (1.0 - params.epsilon)


def error_bound(epsilon: float, delta: float) -> float:
    """Worst-case |p0_eta - p0| at eta = q_c: eps * delta / (1 - eps)."""
    _check_epsilon(epsilon)
    return epsilon * delta / (1.0 - epsilon)


def readout_error_rate(pi: PovmElement, a: "str | OutcomeString | None" = None, convention: str = "raw") -> float:
    """
    raw: 1 - <a|Pi|a>; normalized: 1 - <a|Pi|a> / tr(Pi).
    """
    a = OutcomeString.parse(a) if a is not None else pi.outcome
    if a.n != num_qubits(pi.matrix):
        raise DimensionMismatchError(f"outcome {a} does not match a {num_qubits(pi.matrix)}-qubit effect")
    weight = float(pi.matrix[a.index, a.index].real)
    if convention == "raw":
        return 1.0 - weight
    if convention == "normalized":
        return 1.0 - weight / pi.trace
    raise InvalidParameterError(f"unknown error-rate convention {convention!r}; expected 'raw' or 'normalized'")


def q_value(rho: DensityOperator, dec: ElementDecomposition) -> float:
    """q(a) = tr[rho V^dagger P V], the quantity eta stands in for."""
    if dec.P is None:
        return 0.0
    U = dec.V.matrix
    return expectation(rho, U.conj().T @ dec.P @ U)


def mitigate(
    rho: DensityOperator,
    pi: PovmElement,
    dec: ElementDecomposition,
    eta: float | None = None,
) -> MitigationReport:
    """Pre-process with dec.V, detect with pi, post-process with eta (q_c by default)."""
    params = MitigationParameters.from_decomposition(dec, eta)
    p_e = noisy_probability(rho, pi, dec.V)
    p0_eta = post_process(p_e, params)

    U = dec.V.matrix
    rotated = PovmElement(pi.outcome, U.conj().T @ pi.matrix @ U, pi.reported_trace)
    report = MitigationReport(
        p_e=p_e,
        p0_eta=p0_eta,
        bound=error_bound(dec.epsilon, dec.delta),
        error_rate_raw=readout_error_rate(pi, dec.outcome, "raw"),
        error_rate_qpp=readout_error_rate(rotated, dec.outcome, "raw"),
        true_p0=float(as_matrix(rho)[dec.outcome.index, dec.outcome.index].real),
    )
    logger.debug(f"Mitigated outcome {dec.outcome}: p_e={p_e:.5f} -> p0_eta={p0_eta:.5f} (bound {report.bound:.5f})")
    return report


def mitigate_povm(rho: DensityOperator, povm: Povm, full: FullDecomposition) -> MitigatedDistribution:
    """Complete-measurement variant: one shared V, per-outcome eps and eta = q_c."""
    if povm.n_qubits != full.V.n_qubits:
        raise DimensionMismatchError("POVM and decomposition act on different qubit counts")
    state = apply_qpp(rho, full.V)
    p_e: List[float] = []
    p0: List[float] = []
    bounds: List[float] = []
    for e, dec in zip(povm.elements, full.elements):
        raw = noisy_probability(state, e)
        p_e.append(raw)
        p0.append(post_process(raw, MitigationParameters.from_decomposition(dec)))
        bounds.append(error_bound(dec.epsilon, dec.delta))
    return MitigatedDistribution(
        outcomes=tuple(povm.outcomes), p_e=np.array(p_e), p0_eta=np.array(p0), bounds=np.array(bounds),
    )
