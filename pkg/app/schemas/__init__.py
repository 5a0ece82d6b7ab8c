"""
Pydantic Schemas Package
=========================

JSON shapes shared by fixtures, CLI report files and the HTTP API.

Every file the toolkit writes is one of these models, and model_validate /
model_dump are the only (de)serialization path, so ``--check`` can
re-validate an output without recomputing it.
"""

from app.schemas.matrix import (
    CountTableJSON,
    ElementJSON,
    MatrixJSON,
    PovmJSON,
    TomographyReport
)

from app.schemas.decomposition import (
    DecomposeRequest,
    DecompositionReport,
    FullDecompositionReport,
    OptimizerMeta
)

from app.schemas.witness import (
    CertifyRequest,
    MitigateRequest,
    MitigationReportJSON,
    VerdictJSON,
    VerdictRequest,
    WitnessJSON
)

from app.schemas.circuit import (
    CircuitJSON,
    GateJSON
)

from app.schemas.experiment import (
    ComparisonRow,
    ExperimentReport,
    ExperimentRow,
    ReproductionReport,
    RunMetadata
)

__all__ = [
    # Matrix and POVM schemas
    "CountTableJSON",
    "ElementJSON",
    "MatrixJSON",
    "PovmJSON",
    "TomographyReport",

    # Decomposition schemas
    "DecomposeRequest",
    "DecompositionReport",
    "FullDecompositionReport",
    "OptimizerMeta",

    # Witness schemas
    "CertifyRequest",
    "MitigateRequest",
    "MitigationReportJSON",
    "VerdictJSON",
    "VerdictRequest",
    "WitnessJSON",

    # Circuit schemas
    "CircuitJSON",
    "GateJSON",

    # Experiment schemas
    "ComparisonRow",
    "ExperimentReport",
    "ExperimentRow",
    "ReproductionReport",
    "RunMetadata",
]
