"""
Report files: write any output schema as JSON and re-validate it later
without recomputation (the ``--check`` path).
"""

import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Type

from pydantic import BaseModel, ValidationError

from app.config import get_settings
from app.exceptions import FixtureIOError, FixtureParseError
from app.quantum.decomposer import ElementDecomposition, detect_crosstalk
from app.quantum.mitigator import readout_error_rate
from app.quantum.tomography import PovmElement
from app.schemas.decomposition import DecompositionReport, FullDecompositionReport
from app.schemas.experiment import ExperimentReport, ReproductionReport
from app.schemas.matrix import TomographyReport
from app.schemas.witness import MitigationReportJSON
from app.utils.fixtures import read_json

logger = logging.getLogger(__name__)

REPORT_SCHEMAS: Dict[str, Type[BaseModel]] = {
    "tomography": TomographyReport,
    "decomposition": DecompositionReport,
    "full_decomposition": FullDecompositionReport,
    "mitigation": MitigationReportJSON,
    "experiment": ExperimentReport,
    "reproduction": ReproductionReport,
}

_write_lock = threading.Lock()


def write_report(report: BaseModel, path: Path) -> Path:
    path = Path(path)
    try:
        with _write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise FixtureIOError(f"cannot write {path}: {e.strerror or e}") from e
    logger.info(f"Wrote {getattr(report, 'kind', 'report')} report to {path}")
    return path


def check_file(path: Path) -> BaseModel:
    """
    Re-validate a report file against the schema named by its "kind".

    Raises:
        FixtureIOError: If the file cannot be read
        FixtureParseError: If it is not JSON, has an unknown kind or fails validation
    """
    data = read_json(Path(path))
    kind = data.get("kind") if isinstance(data, dict) else None
    schema = REPORT_SCHEMAS.get(kind)
    if schema is None:
        raise FixtureParseError(f"{path} has unknown report kind {kind!r}; expected one of {sorted(REPORT_SCHEMAS)}")
    try:
        report = schema.model_validate(data)
    except ValidationError as e:
        raise FixtureParseError(f"{path} is not a valid {kind} report: {e.errors()[0]['msg']}") from e
    logger.info(f"{path} is a valid {kind} report")
    return report


def build_decomposition_report(
    dec: ElementDecomposition,
    pi: PovmElement,
    source: Optional[str] = None,
) -> DecompositionReport:
    """Decomposition report with the crosstalk ratios and both error-rate conventions."""
    ratios: Dict[str, float] = {}
    if pi.n_qubits >= 2:
        ratios = {
            "|".join(map(str, cut)): ratio
            for cut, ratio in detect_crosstalk(pi, get_settings().CROSSTALK_REL_TOL).ratios.items()
        }
    return DecompositionReport.from_decomposition(
        dec,
        schmidt_ratios=ratios,
        error_rate_raw=readout_error_rate(pi, dec.outcome, "raw"),
        error_rate_normalized=readout_error_rate(pi, dec.outcome, "normalized"),
        source=source,
    )
