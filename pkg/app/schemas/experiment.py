"""
Experiment Pydantic Schemas
===========================

Reports written by the certify and reproduce commands.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, validator


Verdict = Literal["entangled_below", "entangled_above", "inconclusive"]


class ExperimentRow(BaseModel):
    """One prepared state pushed through witness, detector and (optionally) mitigation."""

    state: str
    r: float
    p0_formula: float = Field(..., description="tr[W rho], noiseless detector")
    p_e: float = Field(..., description="Analytic detection probability of outcome 00")
    p_e_mean: Optional[float] = Field(None, description="Mean over simulated repetitions")
    p_e_std: Optional[float] = Field(None, ge=0)
    p_e_qpp: Optional[float] = None
    p_e_qpp_model: Optional[float] = None
    p0_eta: Optional[float] = None
    verdict_raw: Verdict
    verdict_mitigated: Optional[Verdict] = None
    margin_raw: float
    margin_mitigated: Optional[float] = None
    paper: Dict[str, float] = Field(default_factory=dict)


class RunMetadata(BaseModel):
    seed: int
    shots: int = Field(..., ge=1)
    repetitions: int = Field(..., ge=1)
    detector: str
    preparation: Literal["werner", "circuit"] = "werner"
    window: Tuple[float, float]
    mitigation: Optional[Dict[str, float]] = None


class ExperimentReport(BaseModel):
    kind: Literal["experiment"] = "experiment"
    rows: List[ExperimentRow]
    metadata: RunMetadata
    notes: List[str] = Field(default_factory=list)


class ComparisonRow(BaseModel):
    """Published value next to the computed one; ``passed`` is None when only recorded."""

    quantity: str
    paper: Optional[float] = None
    artifact: float
    abs_diff: Optional[float] = None
    tolerance: Optional[float] = None
    passed: Optional[bool] = None

    @validator("abs_diff", always=True)
    def fill_abs_diff(cls, v, values):
        if v is None and values.get("paper") is not None and "artifact" in values:
            return abs(values["artifact"] - values["paper"])
        return v


class ReproductionReport(BaseModel):
    kind: Literal["reproduction"] = "reproduction"
    what: str
    comparisons: List[ComparisonRow] = Field(default_factory=list)
    experiment: Optional[ExperimentReport] = None
    notes: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def failures(self) -> List[ComparisonRow]:
        return [c for c in self.comparisons if c.passed is False]
