"""
Witness Pydantic Schemas
========================

Witness operator, certification verdict, mitigation report and the request
bodies of the witness and mitigation endpoints.
"""

from dataclasses import asdict
from typing import Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, validator

from app.quantum.mitigator import MitigationReport
from app.quantum.witness import CertificationVerdict, WitnessOperator
from app.schemas.matrix import MatrixJSON


class WitnessJSON(BaseModel):
    W: MatrixJSON
    B_L: float
    B_U: float
    source: str = Field(default="hard-coded window", description="Where the window comes from")

    @classmethod
    def from_witness(cls, witness: WitnessOperator, source: str = "hard-coded window") -> "WitnessJSON":
        return cls(W=MatrixJSON.from_array(witness.W), B_L=witness.B_L, B_U=witness.B_U, source=source)

    def to_witness(self) -> WitnessOperator:
        return WitnessOperator(self.W.to_array(), self.B_L, self.B_U)


class VerdictJSON(BaseModel):
    probability: float
    window: Tuple[float, float]
    verdict: Literal["entangled_below", "entangled_above", "inconclusive"]
    margin: float

    @classmethod
    def from_verdict(cls, v: CertificationVerdict) -> "VerdictJSON":
        return cls(probability=v.probability, window=v.window, verdict=v.verdict, margin=v.margin)


class MitigationReportJSON(BaseModel):
    kind: Literal["mitigation"] = "mitigation"
    outcome: Optional[str] = None
    p_e: float
    p0_eta: float
    bound: float = Field(..., ge=0)
    error_rate_raw: float
    error_rate_qpp: float
    true_p0: Optional[float] = None
    fixture: Optional[str] = None
    seed: Optional[int] = None

    @classmethod
    def from_report(cls, report: MitigationReport, **provenance) -> "MitigationReportJSON":
        return cls(**asdict(report), **provenance)


class CertifyRequest(BaseModel):
    """Body of POST /api/v1/witness/certify."""

    state: Literal["phi_plus", "psi_minus"]
    r: float = Field(..., ge=0.0, le=1.0, description="Mixing parameter of the Werner-type state")
    detector: Union[Literal["ideal"], MatrixJSON] = "ideal"
    mitigate: bool = False
    trace_pi: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = Field(None, ge=0.0, lt=1.0)
    eta: Optional[float] = None

    @validator("eta")
    def validate_eta_needs_epsilon(cls, v, values):
        if v is not None and values.get("epsilon") is None:
            raise ValueError("eta is only meaningful together with epsilon")
        return v

    class Config:
        json_schema_extra = {
            "example": {"state": "psi_minus", "r": 0.375, "detector": "ideal", "mitigate": False}
        }


class VerdictRequest(BaseModel):
    """Body of POST /api/v1/witness/verdict; the window defaults to (1/8, 3/8)."""

    probability: float = Field(..., description="Measured or post-processed probability; p0_eta may leave [0, 1]")
    window: Tuple[float, float] = (0.125, 0.375)

    @validator("window")
    def validate_window_order(cls, v):
        if v[0] > v[1]:
            raise ValueError("window lower bound exceeds upper bound")
        return v


class MitigateRequest(BaseModel):
    """Body of POST /api/v1/mitigate: decompose the element, then mitigate one state."""

    element: MatrixJSON
    outcome: str = Field(..., pattern=r"^[01]+$")
    state: MatrixJSON
    eta: Optional[float] = None
    seed: Optional[int] = None
    starts: Optional[int] = Field(None, ge=1, le=256)

    class Config:
        json_schema_extra = {
            "example": {
                "element": {"dim": 2, "rows": [[[0.95, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.08, 0.0]]]},
                "outcome": "0",
                "state": {"dim": 2, "rows": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
                "starts": 8,
            }
        }
