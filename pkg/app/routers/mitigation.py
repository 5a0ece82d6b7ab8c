"""
Mitigation Router
=================

Endpoints:
- POST /mitigate - Decompose a posted element and mitigate one state with it
"""

from fastapi import APIRouter, status
import logging

from app.config import get_settings
from app.quantum.decomposer import decompose_element
from app.quantum.mitigator import mitigate
from app.quantum.qops import DensityOperator, OutcomeString
from app.quantum.tomography import PovmElement
from app.schemas.witness import MitigateRequest, MitigationReportJSON

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/mitigate",
    status_code=status.HTTP_200_OK,
    response_model=MitigationReportJSON
)
def mitigate_state(request: MitigateRequest):
    """
    Pre-process with the optimized V, detect, then post-process with eta.

    eta defaults to the centre q_c of the residual's spectral window, where
    the reported bound holds.

    Raises:
        MitigatorError: Mapped to 422 by the application handler
    """
    seed = get_settings().DEFAULT_SEED if request.seed is None else request.seed
    pi = PovmElement(OutcomeString.parse(request.outcome), request.element.to_array())
    rho = DensityOperator(request.state.to_array())
    dec = decompose_element(pi, outcome=request.outcome, starts=request.starts, seed=seed)
    report = mitigate(rho, pi, dec, eta=request.eta)
    logger.info(f"Mitigated posted state on outcome {request.outcome}: {report.p_e:.5f} -> {report.p0_eta:.5f}")
    return MitigationReportJSON.from_report(report, outcome=request.outcome, fixture="request", seed=seed)
