"""
Matrix and POVM Schemas
=======================

JSON shapes shared by fixtures, CLI files and the HTTP API.

Matrix: {"dim": d, "rows": [[[re, im], ...], ...]} row-major. Floats are
written with Python's shortest round-trip repr, so encode/decode is bit-exact.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, validator

from app.quantum.qops import OutcomeString
from app.quantum.tomography import CountTable, Povm, PovmElement


class MatrixJSON(BaseModel):
    """Dense complex matrix."""

    dim: int = Field(..., ge=1, description="Matrix dimension (a power of two)")
    rows: List[List[Tuple[float, float]]] = Field(..., description="Row-major [re, im] pairs")

    @validator("rows")
    def validate_square(cls, v, values):
        dim = values.get("dim")
        if dim is not None and (len(v) != dim or any(len(row) != dim for row in v)):
            raise ValueError(f"rows must form a {dim}x{dim} matrix")
        return v

    @validator("dim")
    def validate_power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError("dim must be a power of two")
        return v

    def to_array(self) -> np.ndarray:
        return np.array([[complex(re, im) for re, im in row] for row in self.rows], dtype=complex)

    @classmethod
    def from_array(cls, M: np.ndarray) -> "MatrixJSON":
        M = np.asarray(M, dtype=complex)
        return cls(dim=M.shape[0], rows=[[(float(z.real), float(z.imag)) for z in row] for row in M])

    class Config:
        json_schema_extra = {
            "example": {"dim": 2, "rows": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        }


class ElementJSON(BaseModel):
    """One POVM effect, optionally published already normalized."""

    outcome: str = Field(..., pattern=r"^[01]+$")
    matrix: MatrixJSON
    reported_trace: Optional[float] = Field(None, gt=0)

    def to_element(self) -> PovmElement:
        return PovmElement(OutcomeString.parse(self.outcome), self.matrix.to_array(), self.reported_trace)

    @classmethod
    def from_element(cls, e: PovmElement) -> "ElementJSON":
        return cls(outcome=str(e.outcome), matrix=MatrixJSON.from_array(e.matrix), reported_trace=e.reported_trace)


class PovmJSON(BaseModel):
    elements: List[ElementJSON]

    def to_povm(self) -> Povm:
        return Povm(tuple(e.to_element() for e in self.elements))

    @classmethod
    def from_povm(cls, povm: Povm) -> "PovmJSON":
        return cls(elements=[ElementJSON.from_element(e) for e in povm.elements])


class CountTableJSON(BaseModel):
    shots: int = Field(..., ge=1)
    seed: int
    counts: Dict[str, Dict[str, int]]

    def to_table(self) -> CountTable:
        return CountTable(shots=self.shots, seed=self.seed, counts=self.counts)

    @classmethod
    def from_table(cls, table: CountTable) -> "CountTableJSON":
        return cls(shots=table.shots, seed=table.seed, counts={k: dict(v) for k, v in table.counts.items()})


class TomographyReport(BaseModel):
    """Output of the tomography command."""

    kind: Literal["tomography"] = "tomography"
    scheme: str
    shots: int
    seed: int
    reconstructed: PovmJSON
    counts: CountTableJSON = Field(..., description="Raw counts per probe, the input of the reconstruction")
    distances: List[float] = Field(..., description="Per-element max-norm distance to the true POVM")
    max_distance: float
    metadata: Dict[str, Any] = Field(default_factory=dict)
