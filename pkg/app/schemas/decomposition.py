"""
Decomposition Pydantic Schemas
==============================

Report shapes for single-element and full-POVM decompositions, plus the
request body of POST /api/v1/decompose.
"""

from dataclasses import asdict
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from app.quantum.decomposer import ElementDecomposition, FullDecomposition, OptimizerInfo
from app.quantum.mitigator import error_bound
from app.schemas.matrix import ElementJSON, MatrixJSON


class OptimizerMeta(BaseModel):
    starts: int
    evaluations: int
    best_start: int
    seed: int
    baseline_objective: float

    @classmethod
    def from_info(cls, info: Optional[OptimizerInfo]) -> Optional["OptimizerMeta"]:
        if info is None:
            return None
        return cls(**asdict(info))


class DecompositionReport(BaseModel):
    """One outcome's decomposition with derived error figures."""

    kind: Literal["decomposition"] = "decomposition"
    outcome: str
    epsilon: float
    delta: float
    b_minus: float
    b_plus: float
    q_c: float
    objective: float
    trace_pi: float
    exact: bool
    error_bound: float = Field(..., description="eps * delta / (1 - eps)")
    V: List[MatrixJSON] = Field(..., description="Local unitary factors, qubit order")
    P: Optional[MatrixJSON] = None
    crosstalk: Optional[bool] = None
    schmidt_ratios: Dict[str, float] = Field(default_factory=dict)
    error_rate_raw: Optional[float] = None
    error_rate_normalized: Optional[float] = None
    optimizer: Optional[OptimizerMeta] = None
    source: Optional[str] = None

    @classmethod
    def from_decomposition(cls, dec: ElementDecomposition, **extra) -> "DecompositionReport":
        return cls(
            outcome=str(dec.outcome),
            epsilon=dec.epsilon,
            delta=dec.delta,
            b_minus=dec.b_minus,
            b_plus=dec.b_plus,
            q_c=dec.q_c,
            objective=dec.objective,
            trace_pi=dec.trace_pi,
            exact=dec.exact,
            error_bound=error_bound(dec.epsilon, dec.delta),
            V=[MatrixJSON.from_array(U) for U in dec.V.factors],
            P=MatrixJSON.from_array(dec.P) if dec.P is not None else None,
            crosstalk=dec.crosstalk,
            optimizer=OptimizerMeta.from_info(dec.optimizer),
            **extra,
        )


class FullDecompositionReport(BaseModel):
    kind: Literal["full_decomposition"] = "full_decomposition"
    V: List[MatrixJSON]
    objective: float
    elements: List[DecompositionReport]
    optimizer: Optional[OptimizerMeta] = None

    @classmethod
    def from_full(cls, full: FullDecomposition) -> "FullDecompositionReport":
        return cls(
            V=[MatrixJSON.from_array(U) for U in full.V.factors],
            objective=full.objective,
            elements=[DecompositionReport.from_decomposition(d) for d in full.elements],
            optimizer=OptimizerMeta.from_info(full.optimizer),
        )


class DecomposeRequest(BaseModel):
    """Body of POST /api/v1/decompose."""

    element: MatrixJSON
    outcome: str = Field(..., pattern=r"^[01]+$")
    reported_trace: Optional[float] = Field(None, gt=0)
    seed: Optional[int] = None
    starts: Optional[int] = Field(None, ge=1, le=256)

    def to_element(self):
        return ElementJSON(outcome=self.outcome, matrix=self.element, reported_trace=self.reported_trace).to_element()

    class Config:
        json_schema_extra = {
            "example": {
                "element": {"dim": 2, "rows": [[[0.95, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.08, 0.0]]]},
                "outcome": "0",
                "seed": 7,
                "starts": 8,
            }
        }
