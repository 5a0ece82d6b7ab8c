"""
Witness Router
==============

Endpoints:
- GET /witness/paper - Witness operator with its hard-coded window
- POST /witness/certify - Run one Werner-type state through the pipeline
- POST /witness/verdict - Compare a measured probability with a window
"""

from fastapi import APIRouter, status
import logging

from app.harness.experiments import certify_state
from app.quantum.decomposer import decompose_element, normalize_element, spectral_window
from app.quantum.mitigator import MitigationParameters
from app.quantum.qops import OutcomeString, basis_projector
from app.quantum.tomography import PovmElement
from app.quantum.witness import build_paper_witness, certify as certify_probability
from app.schemas.experiment import ExperimentRow
from app.schemas.witness import CertifyRequest, VerdictJSON, VerdictRequest, WitnessJSON

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get(
    "/paper",
    status_code=status.HTTP_200_OK,
    response_model=WitnessJSON
)
async def paper_witness():
    return WitnessJSON.from_witness(build_paper_witness())


def _centre_of_residual(element: PovmElement | None, epsilon: float) -> float:
    """q_c of P = (pi~ - (1 - eps)|00><00|) / eps, the eta used when only epsilon is posted."""
    if epsilon <= 0.0:
        return 0.0
    pi_tilde = normalize_element(element)[0] if element is not None else basis_projector("00")
    return spectral_window((pi_tilde - (1 - epsilon) * basis_projector("00")) / epsilon).q_c


def _mitigation(request: CertifyRequest, element: PovmElement | None) -> MitigationParameters | None:
    if not request.mitigate:
        return None
    if request.epsilon is not None:
        trace_pi = request.trace_pi if request.trace_pi is not None else (element.trace if element else 1.0)
        eta = request.eta if request.eta is not None else _centre_of_residual(element, request.epsilon)
        return MitigationParameters(trace_pi, request.epsilon, eta)
    if element is None:
        return MitigationParameters(trace_pi=1.0, epsilon=0.0, eta=0.0)
    return MitigationParameters.from_decomposition(decompose_element(element))


@router.post(
    "/certify",
    status_code=status.HTTP_200_OK,
    response_model=ExperimentRow
)
def certify(request: CertifyRequest):
    """
    Witness verdicts for one state, raw and (with ``mitigate``) post-processed.

    A posted detector matrix is the 00 element of a two-qubit detector.
    Without explicit epsilon the element is decomposed first.
    """
    element = None
    if request.detector != "ideal":
        element = PovmElement(OutcomeString.parse("00"), request.detector.to_array())
    row = certify_state(request.state, request.r, element=element, mitigation=_mitigation(request, element))
    logger.info(f"Certified {request.state}({request.r}): raw={row.verdict_raw} mitigated={row.verdict_mitigated}")
    return row


@router.post(
    "/verdict",
    status_code=status.HTTP_200_OK,
    response_model=VerdictJSON
)
async def verdict(request: VerdictRequest):
    return VerdictJSON.from_verdict(certify_probability(request.probability, request.window))
