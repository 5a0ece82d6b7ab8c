"""
Gate-level density-matrix simulator and the device circuits: noisy-Bell state
preparation and the witness measurement circuit.

Gate strings in the device notes are written as operator products, so the
rightmost gate acts first; a Circuit stores gates in execution order.
Controlled gates list their controls first and their target last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.exceptions import DimensionMismatchError, InvalidParameterError
from app.quantum.qops import (
    NUMERIC_TOL,
    DensityOperator,
    Matrix,
    as_matrix,
    basis_projector,
    expectation,
    partial_trace,
    permute_qubits,
    random_density,
    trace_distance,
    werner_state,
)
from app.quantum.witness import build_paper_witness

logger = logging.getLogger(__name__)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)

# kind -> (number of qubits, takes an angle)
GATE_KINDS: Dict[str, Tuple[int, bool]] = {
    "RY": (1, True),
    "H": (1, False),
    "X": (1, False),
    "CX": (2, False),
    "CU": (2, True),
    "CCX": (3, False),
}


def ry(theta: float) -> Matrix:
    """Counterclockwise Y rotation."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: Tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise InvalidParameterError(f"unknown gate kind {self.kind!r}")
        arity, has_angle = GATE_KINDS[self.kind]
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != arity or len(set(qubits)) != arity:
            raise InvalidParameterError(f"{self.kind} needs {arity} distinct qubits, got {qubits}")
        if has_angle != (self.angle is not None):
            raise InvalidParameterError(f"{self.kind} {'requires' if has_angle else 'takes no'} angle")
        object.__setattr__(self, "qubits", qubits)

    @property
    def matrix(self) -> Matrix:
        """Local unitary on self.qubits, in the listed order."""
        if self.kind == "RY":
            return ry(self.angle)
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        if self.kind == "CX":
            return np.kron(_P0, np.eye(2)) + np.kron(_P1, _X)
        if self.kind == "CU":
            return np.kron(_P0, np.eye(2)) + np.kron(_P1, ry(self.angle))
        # CCX: |00><00| (x) I + |11><11| (x) X, with |01>, |10> acting as identity
        M = np.eye(8, dtype=complex)
        M[6:, 6:] = _X
        return M

    def inverse(self) -> "Gate":
        if self.angle is not None:
            return Gate(self.kind, self.qubits, -self.angle)
        return self


def embed(gate: Gate, n: int) -> Matrix:
    """Full 2**n operator of a gate, qubit 0 most significant."""
    if max(gate.qubits) >= n:
        raise InvalidParameterError(f"gate {gate.kind}{gate.qubits} out of range for {n} qubits")
    k = len(gate.qubits)
    order = list(gate.qubits) + [q for q in range(n) if q not in gate.qubits]
    full = np.kron(gate.matrix, np.eye(2 ** (n - k)))
    return permute_qubits(full, list(np.argsort(order)))


@dataclass
class Circuit:
    """Gates in execution order; ``label_map`` maps device labels to indices."""

    n_qubits: int
    gates: List[Gate] = field(default_factory=list)
    label_map: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise InvalidParameterError("circuit needs at least one qubit")
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate) -> None:
        if max(gate.qubits) >= self.n_qubits:
            raise InvalidParameterError(f"gate {gate.kind}{gate.qubits} out of range for {self.n_qubits} qubits")

    def append(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.gates.append(gate)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatchError("cannot concatenate circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates, dict(self.label_map))

    def unitary(self) -> Matrix:
        U = np.eye(2 ** self.n_qubits, dtype=complex)
        for g in self.gates:
            U = embed(g, self.n_qubits) @ U
        return U

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)], dict(self.label_map))


def run(circuit: Circuit, initial: "DensityOperator | Matrix") -> DensityOperator:
    """Conjugate the state by each gate in turn."""
    rho = as_matrix(initial)
    if rho.shape[0] != 2 ** circuit.n_qubits:
        raise DimensionMismatchError(
            f"state dimension {rho.shape[0]} does not match a {circuit.n_qubits}-qubit circuit"
        )
    for g in circuit.gates:
        G = embed(g, circuit.n_qubits)
        rho = G @ rho @ G.conj().T
    return DensityOperator(rho)


# ============================================================
# Angle maps
# ============================================================

def theta_of(x: float) -> float:
    """2 arctan(sqrt(x)) for x >= 0; theta_of(inf) = pi."""
    if np.isnan(x) or x < 0:
        raise InvalidParameterError(f"theta is defined for x >= 0, got {x}")
    return float(2 * np.arctan(np.sqrt(x)))


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")


def alpha_of(p: float) -> float:
    _check_p(p)
    return (1 - p) / (1 + 3 * p)


def beta_of(p: float) -> float:
    _check_p(p)
    return (1 - p) / (1 + p)


def _reciprocal(x: float) -> float:
    return np.inf if x == 0 else 1.0 / x


# ============================================================
# Device circuits
# ============================================================

STATE_PREP_LABELS = {"q0": 0, "q1": 1, "q2": 2, "q4": 3, "q6": 4, "q7": 5}
STATE_PREP_PAIR = (STATE_PREP_LABELS["q1"], STATE_PREP_LABELS["q4"])

WITNESS_LABELS = {"q4": 0, "q1": 1, "q2": 2, "q3": 3}
WITNESS_DATA = (WITNESS_LABELS["q4"], WITNESS_LABELS["q1"])


def _labelled(labels: Dict[str, int], steps: Sequence[Tuple[str, Sequence[str], float | None]]) -> Circuit:
    circuit = Circuit(len(labels), label_map=dict(labels))
    for kind, qs, angle in steps:
        circuit.append(Gate(kind, tuple(labels[q] for q in qs), angle))
    return circuit


def prepare_noisy_bell(psi: str, p: float) -> Circuit:
    """
    Six-qubit circuit meant to leave (1 - p)|psi><psi| + (p/4) I on (q1, q4).

    Gates in execution order (rightmost factor of the device string first).
    """
    _check_p(p)
    alpha, beta = alpha_of(p), beta_of(p)
    if psi == "phi_plus":
        steps = [
            ("RY", ["q7"], theta_of(beta)),
            ("CX", ["q7", "q4"], None),
            ("CU", ["q4", "q1"], np.pi / 2),
            ("X", ["q4"], None),
            ("CU", ["q4", "q1"], theta_of(alpha)),
            ("X", ["q4"], None),
            ("CX", ["q1", "q6"], None),
            ("H", ["q0"], None),
            ("CX", ["q1", "q4"], None),
        ]
    elif psi == "psi_minus":
        steps = [
            ("RY", ["q7"], theta_of(_reciprocal(beta))),
            ("CX", ["q7", "q4"], None),
            ("CU", ["q4", "q1"], theta_of(_reciprocal(alpha))),
            ("X", ["q4"], None),
            ("CU", ["q4", "q1"], np.pi / 2),
            ("X", ["q4"], None),
            ("CX", ["q1", "q6"], None),
            ("H", ["q1"], None),
            ("CX", ["q1", "q4"], None),
        ]
    else:
        raise InvalidParameterError(f"unsupported state {psi!r}; expected phi_plus or psi_minus")
    return _labelled(STATE_PREP_LABELS, steps)


def witness_circuit() -> Circuit:
    """
    Four-qubit U~dagger_W: data on (q4, q1), ancillas q2, q3 start in |0>.

    The probability of reading 00 on (q4, q1) afterwards is tr[W~ rho].
    """
    steps = [
        ("CX", ["q1", "q4"], None),
        ("H", ["q1"], None),
        ("CCX", ["q1", "q4", "q2"], None),
        ("CU", ["q1", "q4"], -theta_of(2.0)),
        ("X", ["q3"], None),
        ("X", ["q1"], None),
        ("CX", ["q1", "q4"], None),
        ("CX", ["q1", "q2"], None),
        ("CX", ["q1", "q3"], None),
        ("RY", ["q1"], -np.pi / 3),
    ]
    return _labelled(WITNESS_LABELS, steps)


def measured_marginal(
    circuit: Circuit,
    rho_data: "DensityOperator | Matrix",
    data_qubits: Sequence[int],
    measured: Sequence[int] | None = None,
) -> Matrix:
    """
    Inject rho_data on ``data_qubits`` (others in |0>), run, and reduce to
    ``measured`` (defaults to the data qubits), ascending qubit order.
    """
    r = as_matrix(rho_data)
    data = list(data_qubits)
    if r.shape[0] != 2 ** len(data):
        raise DimensionMismatchError("data state does not match the number of data qubits")
    rest = [q for q in range(circuit.n_qubits) if q not in data]
    initial = r if not rest else np.kron(r, basis_projector("0" * len(rest)))
    initial = permute_qubits(initial, list(np.argsort(data + rest)))
    final = run(circuit, initial)
    return partial_trace(final, measured if measured is not None else data)


# ============================================================
# Validators
# ============================================================

@dataclass(frozen=True, eq=False)
class NoisyBellValidation:
    psi: str
    p: float
    distance: float
    marginal: Matrix
    reproduces: bool


@dataclass(frozen=True)
class WitnessCircuitValidation:
    samples: int
    max_deviation: float
    reproduces: bool


def validate_noisy_bell(psi: str, p: float) -> NoisyBellValidation:
    """Trace distance between the simulated (q1, q4) marginal and the target Werner state."""
    circuit = prepare_noisy_bell(psi, p)
    final = run(circuit, basis_projector("0" * circuit.n_qubits))
    marginal = partial_trace(final, STATE_PREP_PAIR)
    distance = trace_distance(marginal, werner_state(psi, p))
    reproduces = distance <= NUMERIC_TOL
    if not reproduces:
        logger.warning(f"State-prep circuit for {psi}(p={p}) misses the target by trace distance {distance:.4f}")
    return NoisyBellValidation(psi, p, distance, marginal, reproduces)


def witness_probability(rho: "DensityOperator | Matrix") -> float:
    """Probability of 00 on the data pair after the witness circuit."""
    sigma = measured_marginal(witness_circuit(), rho, WITNESS_DATA)
    return float(sigma[0, 0].real)


def validate_witness_circuit(samples: int = 100, seed: int = 0) -> WitnessCircuitValidation:
    """Compare the circuit's 00 probability with tr[W~ rho] on random states."""
    rng = np.random.default_rng(seed)
    W = build_paper_witness().W
    worst = 0.0
    for _ in range(samples):
        rho = random_density(2, rng)
        worst = max(worst, abs(witness_probability(rho) - expectation(rho, W)))
    reproduces = worst <= NUMERIC_TOL
    if not reproduces:
        logger.warning(f"Witness circuit deviates from tr[W rho] by up to {worst:.3e}")
    return WitnessCircuitValidation(samples, worst, reproduces)
