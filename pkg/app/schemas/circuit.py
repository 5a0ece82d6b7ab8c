"""
Circuit Pydantic Schemas
========================

{"n_qubits": n, "label_map": {...}, "gates": [{"kind", "qubits", "angle"}, ...]}
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, validator

from app.quantum.circuits import GATE_KINDS, Circuit, Gate


class GateJSON(BaseModel):
    kind: str
    qubits: List[int]
    angle: Optional[float] = None

    @validator("kind")
    def validate_kind(cls, v):
        if v not in GATE_KINDS:
            raise ValueError(f"kind must be one of {sorted(GATE_KINDS)}")
        return v


class CircuitJSON(BaseModel):
    n_qubits: int = Field(..., ge=1)
    label_map: Dict[str, int] = Field(default_factory=dict)
    gates: List[GateJSON] = Field(default_factory=list)

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "CircuitJSON":
        return cls(
            n_qubits=circuit.n_qubits,
            label_map=dict(circuit.label_map),
            gates=[GateJSON(kind=g.kind, qubits=list(g.qubits), angle=g.angle) for g in circuit.gates],
        )

    def to_circuit(self) -> Circuit:
        return Circuit(
            self.n_qubits,
            [Gate(g.kind, tuple(g.qubits), g.angle) for g in self.gates],
            dict(self.label_map),
        )
