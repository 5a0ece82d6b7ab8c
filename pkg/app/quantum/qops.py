"""
Quantum Operator Primitives
===========================

Dense complex linear algebra and quantum-state primitives everything else is
built on.

Conventions:
- Operators are square numpy arrays of dimension 2**n.
- Qubit indices are 0-based; qubit 0 is the most significant tensor factor,
  so |a1 a2 ... an> has basis index sum(a_j * 2**(n-j)).
- Structural invariants are checked at 1e-10, numerical algebra at 1e-8.

All value types are frozen and hold read-only arrays, so they can be shared
between threads without copying.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg as sla

from app.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NotHermitianError,
    NotPositiveError,
)

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.complex128]

STRUCT_TOL = 1e-10
NUMERIC_TOL = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ============================================================
# Validation helpers
# ============================================================

def as_matrix(M: "Matrix | DensityOperator") -> Matrix:
    """Return the complex array behind M (DensityOperator or array-like)."""
    if isinstance(M, DensityOperator):
        return M.matrix
    return np.asarray(M, dtype=complex)


def num_qubits(M: "Matrix | DensityOperator") -> int:
    """
    Number of qubits an operator acts on.

    Raises:
        DimensionMismatchError: If M is not square with a power-of-two dimension >= 2
    """
    A = as_matrix(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    d = A.shape[0]
    if d < 2 or d & (d - 1):
        raise DimensionMismatchError(f"dimension {d} is not a power of two >= 2")
    return d.bit_length() - 1


def hermiticity_defect(M: Matrix) -> float:
    """Max-norm of M - M^dagger."""
    A = as_matrix(M)
    return float(np.max(np.abs(A - A.conj().T)))


def is_hermitian(M: Matrix, tol: float = STRUCT_TOL) -> bool:
    return hermiticity_defect(M) <= tol


def hermitize(M: Matrix) -> Matrix:
    A = as_matrix(M)
    return (A + A.conj().T) / 2


def min_eigenvalue(M: Matrix) -> float:
    return float(np.linalg.eigvalsh(hermitize(M))[0])


def is_psd(M: Matrix, tol: float = NUMERIC_TOL) -> bool:
    return min_eigenvalue(M) >= -tol


def _check_same_dim(A: Matrix, B: Matrix) -> None:
    if A.shape != B.shape:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape} vs {B.shape}")


def _validate_qubits(indices: Iterable[int], n: int, allow_empty: bool = False) -> Tuple[int, ...]:
    try:
        qs = tuple(sorted(set(int(q) for q in indices)))
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(f"qubit indices must be integers: {exc}") from exc
    if not qs and not allow_empty:
        raise InvalidParameterError("qubit index set is empty")
    if any(q < 0 or q >= n for q in qs):
        raise InvalidParameterError(f"qubit indices {qs} out of range for {n} qubits")
    return qs


def _readonly(A: Matrix) -> Matrix:
    B = np.array(A, dtype=complex, copy=True)
    B.setflags(write=False)
    return B


# ============================================================
# Domain types
# ============================================================

@dataclass(frozen=True)
class OutcomeString:
    """Measurement outcome a1...an; a1 is the most significant bit."""

    bits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise InvalidParameterError("outcome string must have at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidParameterError(f"outcome bits must be 0 or 1, got {self.bits}")

    @classmethod
    def parse(cls, text: "str | OutcomeString") -> "OutcomeString":
        if isinstance(text, OutcomeString):
            return text
        text = str(text).strip()
        if not text or any(c not in "01" for c in text):
            raise InvalidParameterError(f"invalid outcome bitstring {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_index(cls, index: int, n: int) -> "OutcomeString":
        return cls(tuple((index >> (n - 1 - j)) & 1 for j in range(n)))

    @classmethod
    def all(cls, n: int) -> list["OutcomeString"]:
        """Every outcome string of length n, in basis-index order."""
        return [cls(bits) for bits in itertools.product((0, 1), repeat=n)]

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        return sum(b << (self.n - 1 - j) for j, b in enumerate(self.bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """
    A quantum state: Hermitian, unit trace, positive semidefinite.

    The stored matrix is the Hermitian part of the input, read-only.

    Raises:
        NotHermitianError, NotPositiveError, InvalidParameterError: On invariant violations
    """

    matrix: Matrix

    def __post_init__(self) -> None:
        A = as_matrix(self.matrix)
        num_qubits(A)
        if hermiticity_defect(A) > STRUCT_TOL:
            raise NotHermitianError(f"density operator is not Hermitian (defect {hermiticity_defect(A):.2e})")
        tr = np.trace(A).real
        if abs(tr - 1.0) > STRUCT_TOL:
            raise InvalidParameterError(f"density operator trace is {tr:.12f}, expected 1")
        H = hermitize(A)
        if np.linalg.eigvalsh(H)[0] < -STRUCT_TOL:
            raise NotPositiveError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", _readonly(H))

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, bits: "str | OutcomeString") -> "DensityOperator":
        return cls(basis_projector(bits))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityOperator":
        d = 2 ** n
        return cls(np.eye(d, dtype=complex) / d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return num_qubits(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(np.kron(self.matrix, other.matrix))


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """
    Product unitary V = V_1 (x) ... (x) V_n, one 2x2 factor per qubit.

    Raises:
        InvalidParameterError: If a factor is not 2x2 unitary within 1e-10
    """

    factors: Tuple[Matrix, ...]

    def __post_init__(self) -> None:
        checked = []
        for k, U in enumerate(self.factors):
            U = np.asarray(U, dtype=complex)
            if U.shape != (2, 2):
                raise InvalidParameterError(f"factor {k} has shape {U.shape}, expected (2, 2)")
            defect = float(np.max(np.abs(U.conj().T @ U - PAULI_I)))
            if defect > STRUCT_TOL:
                raise InvalidParameterError(f"factor {k} is not unitary (defect {defect:.2e})")
            checked.append(_readonly(U))
        if not checked:
            raise InvalidParameterError("local unitary needs at least one factor")
        object.__setattr__(self, "factors", tuple(checked))

    @classmethod
    def identity(cls, n: int) -> "LocalUnitary":
        return cls(tuple(PAULI_I for _ in range(n)))

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "LocalUnitary":
        """Z-Y-Z Euler chart, three angles per qubit, global phase fixed."""
        angles = np.asarray(angles, dtype=float).reshape(-1, 3)
        return cls(tuple(euler_zyz(a, b, c) for a, b, c in angles))

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @cached_property
    def matrix(self) -> Matrix:
        return _readonly(kron_all(self.factors))

    def dagger(self) -> "LocalUnitary":
        return LocalUnitary(tuple(U.conj().T for U in self.factors))


# ============================================================
# Constructors
# ============================================================

def kron_all(ops: Iterable[Matrix]) -> Matrix:
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def euler_zyz(alpha: float, beta: float, gamma: float) -> Matrix:
    """Rz(alpha) Ry(beta) Rz(gamma) with Rz(x) = diag(e^{-ix/2}, e^{ix/2})."""
    rz = lambda x: np.diag([np.exp(-0.5j * x), np.exp(0.5j * x)])
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz(alpha) @ ry @ rz(gamma)


def ket(bits: "str | OutcomeString") -> npt.NDArray[np.complex128]:
    a = OutcomeString.parse(bits)
    v = np.zeros(2 ** a.n, dtype=complex)
    v[a.index] = 1.0
    return v


def basis_projector(bits: "str | OutcomeString") -> Matrix:
    v = ket(bits)
    return np.outer(v, v.conj())


_BELL = {
    "phi_plus": (np.array([1, 0, 0, 1], dtype=complex)) / np.sqrt(2),
    "phi_minus": (np.array([1, 0, 0, -1], dtype=complex)) / np.sqrt(2),
    "psi_plus": (np.array([0, 1, 1, 0], dtype=complex)) / np.sqrt(2),
    "psi_minus": (np.array([0, 1, -1, 0], dtype=complex)) / np.sqrt(2),
}


def bell_state(name: str) -> npt.NDArray[np.complex128]:
    try:
        return _BELL[name].copy()
    except KeyError:
        raise InvalidParameterError(f"unknown Bell state {name!r}; expected one of {sorted(_BELL)}") from None


def bell_projector(name: str) -> Matrix:
    v = bell_state(name)
    return np.outer(v, v.conj())


def werner_state(name: str, r: float) -> DensityOperator:
    """(1 - r)|psi><psi| + (r/4) I for a Bell state psi."""
    if not 0.0 <= r <= 1.0:
        raise InvalidParameterError(f"mixing parameter r={r} outside [0, 1]")
    return DensityOperator((1 - r) * bell_projector(name) + (r / 4) * np.eye(4, dtype=complex))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Ginibre-distributed random state of the given rank (full rank by default)."""
    d = 2 ** n
    k = rank or d
    G = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = G @ G.conj().T
    return DensityOperator(rho / np.trace(rho).real)


def random_unitary(d: int, rng: np.random.Generator) -> Matrix:
    """Haar-random unitary via QR of a Ginibre matrix."""
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def random_local_unitary(n: int, rng: np.random.Generator) -> LocalUnitary:
    return LocalUnitary(tuple(random_unitary(2, rng) for _ in range(n)))


def unitarize(U: Matrix) -> Matrix:
    """Closest unitary in Frobenius norm (polar factor)."""
    W, _ = sla.polar(np.asarray(U, dtype=complex))
    return W


def project_psd(M: Matrix) -> Matrix:
    """Hermitian part of M with negative eigenvalues clipped to zero."""
    w, v = np.linalg.eigh(hermitize(M))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def trace_distance(A: "Matrix | DensityOperator", B: "Matrix | DensityOperator") -> float:
    a, b = as_matrix(A), as_matrix(B)
    _check_same_dim(a, b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))


def permute_qubits(M: Matrix, order: Sequence[int]) -> Matrix:
    """Reorder tensor factors: factor k of the result is factor order[k] of M."""
    A = as_matrix(M)
    n = num_qubits(A)
    if sorted(order) != list(range(n)):
        raise InvalidParameterError(f"{order} is not a permutation of {n} qubits")
    order = list(order)
    T = A.reshape([2] * (2 * n)).transpose(order + [n + q for q in order])
    return T.reshape(A.shape)


# ============================================================
# Operations
# ============================================================

def expectation(rho: "DensityOperator | Matrix", effect: Matrix) -> float:
    """
    Born-rule value Re tr[rho E].

    Raises:
        DimensionMismatchError: If rho and effect act on different spaces
        NotHermitianError: If the effect, or the trace, is not Hermitian within 1e-10
    """
    r, E = as_matrix(rho), as_matrix(effect)
    _check_same_dim(r, E)
    if hermiticity_defect(E) > STRUCT_TOL:
        raise NotHermitianError(f"effect is not Hermitian (defect {hermiticity_defect(E):.2e})")
    value = np.einsum("ij,ji->", r, E)
    if abs(value.imag) > STRUCT_TOL:
        raise NotHermitianError(f"tr[rho E] has imaginary part {value.imag:.2e}; effect is not Hermitian")
    return float(value.real)


def partial_trace(M: "Matrix | DensityOperator", keep: Iterable[int]) -> Matrix:
    """
    Reduce M onto the qubits in ``keep`` (returned in ascending qubit order).

    Example:
        >>> partial_trace(np.kron(A, B), keep=[0])   # -> A * tr(B)
    """
    A = as_matrix(M)
    n = num_qubits(A)
    kept = _validate_qubits(keep, n)
    if len(kept) == n:
        return A.copy()
    traced = [q for q in range(n) if q not in kept]
    order = list(kept) + traced
    T = A.reshape([2] * (2 * n)).transpose(order + [n + q for q in order])
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    return np.einsum("ijkj->ik", T.reshape(dk, dt, dk, dt))


def partial_transpose(M: "Matrix | DensityOperator", transposed: Iterable[int]) -> Matrix:
    """Transpose the tensor factors listed in ``transposed``; an involution."""
    A = as_matrix(M)
    n = num_qubits(A)
    qs = _validate_qubits(transposed, n, allow_empty=True)
    axes = list(range(2 * n))
    for q in qs:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return A.reshape([2] * (2 * n)).transpose(axes).reshape(A.shape)


def operator_schmidt_spectrum(M: "Matrix | DensityOperator", split: Iterable[int]) -> npt.NDArray[np.float64]:
    """
    Singular values (descending) of the realigned operator across split : rest.

    The number of values above rel_tol * largest is the operator Schmidt rank;
    rank 1 means M factorizes across the cut.
    """
    A = as_matrix(M)
    n = num_qubits(A)
    part = list(_validate_qubits(split, n))
    rest = [q for q in range(n) if q not in part]
    if not rest:
        raise InvalidParameterError("split must leave at least one qubit on the other side")
    order = part + rest
    dA, dB = 2 ** len(part), 2 ** len(rest)
    T = A.reshape([2] * (2 * n)).transpose(order + [n + q for q in order])
    realigned = T.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
    return np.linalg.svd(realigned, compute_uv=False)


def schmidt_rank(spectrum: npt.NDArray[np.float64], rel_tol: float = NUMERIC_TOL) -> int:
    if spectrum.size == 0 or spectrum[0] == 0:
        return 0
    return int(np.sum(spectrum > rel_tol * spectrum[0]))


def eig_hermitian(M: "Matrix | DensityOperator") -> Tuple[npt.NDArray[np.float64], Matrix]:
    """
    Ascending eigenvalues and orthonormal eigenvectors (columns).

    Raises:
        NotHermitianError: If ||M - M^dagger||_max > 1e-8
    """
    A = as_matrix(M)
    num_qubits(A)
    defect = hermiticity_defect(A)
    if defect > NUMERIC_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.2e})")
    return np.linalg.eigh(hermitize(A))
