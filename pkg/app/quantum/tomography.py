"""
Detector Tomography
===================

Simulate shot counts of probe states against a (hidden) POVM, reconstruct the
POVM by linear least squares and repair it into a physical one.

Reconstruction:
    tr[rho_k Pi_a] = vec(rho_k^T) . vec(Pi_a), so stacking one row per probe
    gives a linear system A x_a = p_a per outcome, solved with lstsq. An
    operator-spanning probe set makes A full column rank, and exact
    probabilities then recover the effects exactly.

Physicality repair clips negative eigenvalues and then rescales jointly with
S^{-1/2} (.) S^{-1/2}, S being the sum of the clipped effects.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from app.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NotHermitianError,
    NotPositiveError,
)
from app.quantum.qops import (
    NUMERIC_TOL,
    STRUCT_TOL,
    DensityOperator,
    Matrix,
    OutcomeString,
    as_matrix,
    basis_projector,
    expectation,
    hermiticity_defect,
    hermitize,
    kron_all,
    num_qubits,
    project_psd,
)

logger = logging.getLogger(__name__)

SCHEMES = ("pauli6", "mub4")


# ============================================================
# Domain types
# ============================================================

@dataclass(frozen=True, eq=False)
class PovmElement:
    """
    One effect operator of a detector, labelled by its outcome string.

    ``reported_trace`` is set for fixtures published already normalized; it
    carries tr(Pi) of the un-normalized element.
    """

    outcome: OutcomeString
    matrix: Matrix
    reported_trace: float | None = None

    def __post_init__(self) -> None:
        outcome = OutcomeString.parse(self.outcome)
        A = as_matrix(self.matrix)
        n = num_qubits(A)
        if n != outcome.n:
            raise DimensionMismatchError(f"outcome {outcome} has {outcome.n} bits but the effect acts on {n} qubits")
        if hermiticity_defect(A) > STRUCT_TOL:
            raise NotHermitianError(f"effect {outcome} is not Hermitian (defect {hermiticity_defect(A):.2e})")
        w = np.linalg.eigvalsh(hermitize(A))
        if w[0] < -NUMERIC_TOL:
            raise NotPositiveError(f"effect {outcome} has eigenvalue {w[0]:.3e} < 0")
        if w[-1] > 1 + NUMERIC_TOL:
            raise NotPositiveError(f"effect {outcome} has eigenvalue {w[-1]:.6f} > 1")
        if self.reported_trace is not None and self.reported_trace <= 0:
            raise InvalidParameterError("reported trace must be positive")
        H = hermitize(A)
        H.setflags(write=False)
        object.__setattr__(self, "outcome", outcome)
        object.__setattr__(self, "matrix", H)

    @property
    def n_qubits(self) -> int:
        return self.outcome.n

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True, eq=False)
class Povm:
    """Complete set of effects, one per outcome string, stored in basis-index order."""

    elements: Tuple[PovmElement, ...]

    def __post_init__(self) -> None:
        elements = tuple(sorted(self.elements, key=lambda e: e.outcome.index))
        if not elements:
            raise InvalidParameterError("POVM has no elements")
        n = elements[0].n_qubits
        if [e.outcome.index for e in elements] != list(range(2 ** n)) or any(e.n_qubits != n for e in elements):
            raise InvalidParameterError(f"POVM must have exactly one element per {n}-bit outcome")
        total = sum(e.matrix for e in elements)
        defect = float(np.max(np.abs(total - np.eye(2 ** n))))
        if defect > NUMERIC_TOL:
            raise InvalidParameterError(f"POVM is not complete: ||sum - I||_max = {defect:.3e}")
        object.__setattr__(self, "elements", elements)

    @classmethod
    def from_matrices(cls, matrices: Sequence[Matrix]) -> "Povm":
        n = num_qubits(matrices[0])
        return cls(tuple(PovmElement(OutcomeString.from_index(k, n), M) for k, M in enumerate(matrices)))

    @property
    def n_qubits(self) -> int:
        return self.elements[0].n_qubits

    @property
    def outcomes(self) -> List[OutcomeString]:
        return [e.outcome for e in self.elements]

    def element(self, outcome: "str | OutcomeString") -> PovmElement:
        a = OutcomeString.parse(outcome)
        if a.n != self.n_qubits:
            raise DimensionMismatchError(f"outcome {a} does not match a {self.n_qubits}-qubit POVM")
        return self.elements[a.index]

    def matrices(self) -> List[Matrix]:
        return [e.matrix for e in self.elements]

    def probabilities(self, rho: "DensityOperator | Matrix") -> np.ndarray:
        return np.array([expectation(rho, e.matrix) for e in self.elements])


@dataclass(frozen=True)
class CountTable:
    """Outcome counts per probe id; every probe row sums to ``shots``."""

    shots: int
    seed: int
    counts: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise InvalidParameterError("shots per probe must be positive")
        for probe, row in self.counts.items():
            if any(c < 0 for c in row.values()):
                raise InvalidParameterError(f"negative count for probe {probe}")
            if sum(row.values()) != self.shots:
                raise InvalidParameterError(
                    f"counts for probe {probe} sum to {sum(row.values())}, expected {self.shots}"
                )

    def frequencies(self, probe: str, outcomes: Sequence[OutcomeString]) -> np.ndarray:
        try:
            row = self.counts[probe]
        except KeyError:
            raise InvalidParameterError(f"no counts recorded for probe {probe!r}") from None
        return np.array([row.get(str(a), 0) for a in outcomes], dtype=float) / self.shots


# ============================================================
# Probe states
# ============================================================

_PAULI6 = {
    "Z+": np.array([1, 0], dtype=complex),
    "Z-": np.array([0, 1], dtype=complex),
    "X+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "X-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "Y+": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "Y-": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}

_TETRA_BLOCH = {
    "T0": (1, 1, 1),
    "T1": (1, -1, -1),
    "T2": (-1, 1, -1),
    "T3": (-1, -1, 1),
}


def _single_qubit_probes(scheme: str) -> Dict[str, Matrix]:
    if scheme == "pauli6":
        return {k: np.outer(v, v.conj()) for k, v in _PAULI6.items()}
    if scheme == "mub4":
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        Z = np.diag([1, -1]).astype(complex)
        out = {}
        for k, (x, y, z) in _TETRA_BLOCH.items():
            r = np.array([x, y, z]) / np.sqrt(3)
            out[k] = (np.eye(2) + r[0] * X + r[1] * Y + r[2] * Z) / 2
        return out
    raise InvalidParameterError(f"unknown probe scheme {scheme!r}; expected one of {SCHEMES}")


def probe_labels(n: int, scheme: str = "pauli6") -> List[str]:
    """Human-readable ids of probe_states(n, scheme), in the same order."""
    if n < 1:
        raise InvalidParameterError("probe set needs n >= 1")
    single = _single_qubit_probes(scheme)
    return [",".join(combo) for combo in itertools.product(single, repeat=n)]


def probe_states(n: int, scheme: str = "pauli6") -> List[DensityOperator]:
    """
    Product probe states for detector tomography.

    pauli6 gives the 6**n products of Pauli eigenstates; mub4 the 4**n
    products of tetrahedral states. Both sets span the operator space.
    """
    if n < 1:
        raise InvalidParameterError("probe set needs n >= 1")
    single = _single_qubit_probes(scheme)
    return [DensityOperator(kron_all(combo)) for combo in itertools.product(single.values(), repeat=n)]


# ============================================================
# Sampling
# ============================================================

def simulate_shots(
    povm: Povm,
    probe: DensityOperator,
    shots: int,
    seed: "int | np.random.SeedSequence",
) -> Dict[str, int]:
    """
    Draw ``shots`` i.i.d. outcomes from p(a) = tr[probe Pi_a].

    Raises:
        InvalidParameterError: If shots < 1 or the probabilities do not sum to 1 within 1e-6
    """
    if shots < 1:
        raise InvalidParameterError("shots must be positive")
    probs = povm.probabilities(probe)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise InvalidParameterError(f"outcome probabilities sum to {total:.8f}; POVM is broken")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    return {str(a): int(c) for a, c in zip(povm.outcomes, draws)}


def measure_probes(
    povm: Povm,
    probes: Sequence[DensityOperator],
    shots: int,
    seed: int,
    labels: Sequence[str] | None = None,
) -> CountTable:
    """Sample every probe with its own seed stream spawned from ``seed``."""
    labels = list(labels) if labels is not None else [str(k) for k in range(len(probes))]
    if len(labels) != len(probes):
        raise InvalidParameterError("one label per probe is required")
    streams = np.random.SeedSequence(seed).spawn(len(probes))
    counts = {
        label: simulate_shots(povm, probe, shots, stream)
        for label, probe, stream in zip(labels, probes, streams)
    }
    logger.debug(f"Sampled {len(probes)} probes x {shots} shots (seed={seed})")
    return CountTable(shots=shots, seed=seed, counts=counts)


# ============================================================
# Reconstruction
# ============================================================

def reconstruct_from_frequencies(
    probes: Sequence[DensityOperator],
    frequencies: np.ndarray,
) -> List[Matrix]:
    """
    Least-squares effects from a (probes x outcomes) frequency table.

    Returns the raw Hermitian estimates in outcome order, before any
    physicality repair.

    Raises:
        InvalidParameterError: If the probe set does not span the operator space
    """
    if not probes:
        raise InvalidParameterError("no probe states given")
    d = probes[0].dim
    F = np.asarray(frequencies, dtype=float)
    if F.shape != (len(probes), d):
        raise DimensionMismatchError(f"frequency table has shape {F.shape}, expected {(len(probes), d)}")
    A = np.array([as_matrix(rho).T.reshape(-1) for rho in probes])
    X, _, rank, _ = np.linalg.lstsq(A, F.astype(complex), rcond=None)
    if rank < d * d:
        raise InvalidParameterError(f"probe set is rank deficient ({rank} < {d * d})")
    return [hermitize(X[:, k].reshape(d, d)) for k in range(d)]


def reconstruct_povm(
    probes: Sequence[DensityOperator],
    counts: CountTable,
    labels: Sequence[str] | None = None,
) -> Povm:
    """Reconstruct a physical POVM from a CountTable (least squares, then projection)."""
    labels = list(labels) if labels is not None else [str(k) for k in range(len(probes))]
    n = probes[0].n_qubits
    outcomes = OutcomeString.all(n)
    F = np.array([counts.frequencies(label, outcomes) for label in labels])
    raw = reconstruct_from_frequencies(probes, F)
    return project_to_physical(raw)


def project_to_physical(raw: Sequence[Matrix]) -> Povm:
    """
    Nearest-by-construction physical POVM: clip, then rescale jointly.

    Idempotent on physical input.

    Raises:
        InvalidParameterError: If the raw effects are far from summing to I
    """
    mats = [hermitize(M) for M in raw]
    d = mats[0].shape[0]
    if any(M.shape != (d, d) for M in mats):
        raise DimensionMismatchError("raw effects have inconsistent dimensions")
    defect = float(np.max(np.abs(sum(mats) - np.eye(d))))
    if defect > 0.2:
        raise InvalidParameterError(f"raw effects sum far from identity (||sum - I||_max = {defect:.3f})")
    clipped = [project_psd(M) for M in mats]
    S = sum(clipped)
    w, v = np.linalg.eigh(hermitize(S))
    if w[0] <= 0:
        raise InvalidParameterError("clipped effects do not sum to an invertible operator")
    T = (v / np.sqrt(w)) @ v.conj().T
    return Povm.from_matrices([hermitize(T @ M @ T) for M in clipped])


# ============================================================
# Detector models
# ============================================================

def ideal_povm(n: int) -> Povm:
    """Noiseless computational-basis measurement."""
    return Povm.from_matrices([basis_projector(a) for a in OutcomeString.all(n)])


def product_povm(single_qubit: Sequence[Povm]) -> Povm:
    """Crosstalk-free detector: Pi_{a1..an} = Pi_{a1} (x) ... (x) Pi_{an}."""
    if any(p.n_qubits != 1 for p in single_qubit):
        raise InvalidParameterError("product_povm takes single-qubit POVMs")
    outcomes = OutcomeString.all(len(single_qubit))
    return Povm.from_matrices([
        kron_all(p.elements[b].matrix for p, b in zip(single_qubit, a.bits)) for a in outcomes
    ])


def confusion_povm(flip_probs: Sequence["float | Tuple[float, float]"]) -> Povm:
    """
    Classical bit-flip detector, independent per qubit.

    Each entry is either a symmetric flip probability q, or a pair
    (P(read 1 | 0), P(read 0 | 1)).
    """
    singles = []
    for q in flip_probs:
        q0, q1 = (q, q) if np.isscalar(q) else q
        if not (0.0 <= q0 <= 1.0 and 0.0 <= q1 <= 1.0):
            raise InvalidParameterError(f"flip probabilities {q0}, {q1} outside [0, 1]")
        singles.append(Povm.from_matrices([np.diag([1 - q0, q1]), np.diag([q0, 1 - q1])]))
    return product_povm(singles)


def random_povm(n: int, rng: np.random.Generator) -> Povm:
    """Random full-rank POVM: Wishart effects normalized by S^{-1/2}."""
    d = 2 ** n
    G = []
    for _ in range(d):
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        G.append(X @ X.conj().T)
    w, v = np.linalg.eigh(sum(G))
    T = (v / np.sqrt(w)) @ v.conj().T
    return Povm.from_matrices([hermitize(T @ g @ T) for g in G])


def complete_povm(element: PovmElement, flip: float) -> Povm:
    """
    Complete a single published effect into a full POVM.

    The remainder R = I - Pi is shared among the other outcomes as
    R^{1/2} C_b R^{1/2}, where C_b are diagonal classical-confusion weights
    (independent bit flips with probability ``flip``) renormalized over b != a.
    """
    if not 0.0 < flip < 1.0:
        raise InvalidParameterError(f"flip probability {flip} outside (0, 1)")
    n, a = element.n_qubits, element.outcome
    d = 2 ** n
    R = project_psd(np.eye(d) - element.matrix)
    w, v = np.linalg.eigh(R)
    R_half = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T

    outcomes = OutcomeString.all(n)
    others = [b for b in outcomes if b.index != a.index]
    weights = np.array([
        [np.prod([flip if bj != xj else 1 - flip for bj, xj in zip(b.bits, x.bits)]) for x in outcomes]
        for b in others
    ])
    weights /= weights.sum(axis=0, keepdims=True)

    mats: List[Matrix] = [None] * d  # type: ignore[list-item]
    mats[a.index] = element.matrix
    for b, wb in zip(others, weights):
        mats[b.index] = hermitize(R_half @ np.diag(wb) @ R_half)
    return Povm.from_matrices(mats)


def povm_distance(a: Povm, b: Povm) -> List[float]:
    """Per-element max-norm distance between two POVMs on the same outcomes."""
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatchError("POVMs act on different qubit counts")
    return [float(np.max(np.abs(x.matrix - y.matrix))) for x, y in zip(a.elements, b.elements)]
