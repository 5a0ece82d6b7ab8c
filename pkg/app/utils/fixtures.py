"""
Fixture Utilities
=================

Load the transcribed device matrices and parameters shipped under
fixtures/ (or the directory named by MITIGATOR_FIXTURES).

Repairs applied on load, each logged with its size:
- Hermitian part: M <- (M + M^dagger) / 2; fails above FIXTURE_HERMITICITY_TOL
- PSD repair: negative eigenvalues down to -FIXTURE_PSD_TOL are clipped
- Unitaries: replaced by their polar factor

Failure mapping:
- missing or unreadable file -> FixtureIOError (exit 2)
- invalid JSON or wrong shape -> FixtureParseError (exit 3)
- numerical violations -> NumericalValidationError subclasses (exit 5)
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from app.config import get_settings
from app.exceptions import FixtureIOError, FixtureParseError, NotHermitianError, NotPositiveError
from app.quantum.qops import (
    STRUCT_TOL,
    LocalUnitary,
    OutcomeString,
    hermiticity_defect,
    hermitize,
    project_psd,
    unitarize,
)
from app.quantum.tomography import Povm, PovmElement
from app.schemas.matrix import ElementJSON, MatrixJSON

# ============================================================
# Logger Configuration
# ============================================================
logger = logging.getLogger(__name__)


class FixtureJSON(BaseModel):
    """On-disk fixture; which payload field is set depends on ``kind``."""

    id: str
    kind: Literal["povm_element", "povm", "local_unitary", "parameters"]
    source: str = ""
    outcome: Optional[str] = Field(None, pattern=r"^[01]+$")
    reported_trace: Optional[float] = Field(None, gt=0)
    matrix: Optional[MatrixJSON] = None
    elements: Optional[List[ElementJSON]] = None
    factors: Optional[List[MatrixJSON]] = None
    parameters: Optional[Dict[str, Any]] = None
    notes: Optional[str] = None


# ============================================================
# Reading
# ============================================================

def fixture_path(name: str, directory: Optional[Path] = None) -> Path:
    """
    Resolve a fixture id or a file path.

    Bare ids ("sydney_pi00") resolve inside the fixture directory; anything
    with a suffix or a path separator is taken as a path.
    """
    candidate = Path(name)
    if candidate.suffix or len(candidate.parts) > 1:
        return candidate
    return Path(directory or get_settings().fixtures_dir) / f"{name}.json"


def read_json(path: Path) -> Any:
    """Read a JSON file, mapping failures onto the io / parse error kinds."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FixtureIOError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureParseError(f"{path} is not valid JSON: {e}") from e


def load_fixture(name: str, directory: Optional[Path] = None) -> FixtureJSON:
    path = fixture_path(name, directory)
    data = read_json(path)
    try:
        fixture = FixtureJSON.model_validate(data)
    except ValidationError as e:
        raise FixtureParseError(f"{path} does not match the fixture schema: {e.errors()[0]['msg']}") from e
    logger.info(f"Loaded fixture {fixture.id} ({fixture.kind}) from {path}")
    return fixture


def _expect(fixture: FixtureJSON, kind: str, field: str) -> Any:
    value = getattr(fixture, field)
    if fixture.kind != kind or value is None:
        raise FixtureParseError(f"fixture {fixture.id} is a {fixture.kind}, expected a {kind} with '{field}'")
    return value


# ============================================================
# Repairs
# ============================================================

def repair_hermitian(M: np.ndarray, label: str) -> np.ndarray:
    """
    Symmetrize a printed Hermitian matrix and clip tiny negative eigenvalues.

    Raises:
        NotHermitianError: If the Hermiticity defect exceeds FIXTURE_HERMITICITY_TOL
        NotPositiveError: If an eigenvalue is below -FIXTURE_PSD_TOL
    """
    current = get_settings()
    defect = hermiticity_defect(M)
    if defect > current.FIXTURE_HERMITICITY_TOL:
        raise NotHermitianError(f"fixture {label} has Hermiticity defect {defect:.2e}")
    if defect > 0:
        logger.warning(f"Symmetrized fixture {label} (delta {defect:.2e})")
    H = hermitize(M)
    lowest = float(np.linalg.eigvalsh(H)[0])
    if lowest < -current.FIXTURE_PSD_TOL:
        raise NotPositiveError(f"fixture {label} has eigenvalue {lowest:.3e}, beyond repair tolerance")
    if lowest < -1e-8:
        logger.warning(f"Clipped negative eigenvalue {lowest:.2e} of fixture {label}")
        H = project_psd(H)
    return H


# ============================================================
# Typed loaders
# ============================================================

def element_from_fixture(fixture: FixtureJSON) -> PovmElement:
    M = _expect(fixture, "povm_element", "matrix").to_array()
    outcome = _expect(fixture, "povm_element", "outcome")
    return PovmElement(OutcomeString.parse(outcome), repair_hermitian(M, fixture.id), fixture.reported_trace)


def load_element(name: str, directory: Optional[Path] = None) -> PovmElement:
    return element_from_fixture(load_fixture(name, directory))


def load_povm(name: str, directory: Optional[Path] = None) -> Povm:
    fixture = load_fixture(name, directory)
    elements = _expect(fixture, "povm", "elements")
    return Povm(tuple(
        PovmElement(OutcomeString.parse(e.outcome), repair_hermitian(e.matrix.to_array(), f"{fixture.id}/{e.outcome}"))
        for e in elements
    ))


def load_local_unitary(name: str, directory: Optional[Path] = None) -> LocalUnitary:
    fixture = load_fixture(name, directory)
    factors = []
    for k, m in enumerate(_expect(fixture, "local_unitary", "factors")):
        U = m.to_array()
        W = unitarize(U)
        delta = float(np.max(np.abs(W - U)))
        if delta > STRUCT_TOL:
            logger.warning(f"Unitarized factor {k} of {fixture.id} (delta {delta:.2e})")
        factors.append(W)
    return LocalUnitary(tuple(factors))


def load_parameters(name: str, directory: Optional[Path] = None) -> Dict[str, Any]:
    return dict(_expect(load_fixture(name, directory), "parameters", "parameters"))
