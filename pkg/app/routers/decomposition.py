"""
Decomposition Router
====================

Endpoints:
- POST /decompose - Decompose one POVM element
"""

from fastapi import APIRouter, status
import logging

from app.harness.reports import build_decomposition_report
from app.quantum.decomposer import decompose_element
from app.schemas.decomposition import DecomposeRequest, DecompositionReport

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/decompose",
    status_code=status.HTTP_200_OK,
    response_model=DecompositionReport
)
def decompose(request: DecomposeRequest):
    """
    Minimize eps * delta over product unitaries for the posted element.

    Runs in the worker threadpool (plain def): the optimizer is CPU bound.

    Raises:
        MitigatorError: Mapped to 422 by the application handler
    """
    pi = request.to_element()
    dec = decompose_element(pi, outcome=request.outcome, starts=request.starts, seed=request.seed)
    logger.info(f"Decomposed posted {pi.n_qubits}-qubit element {request.outcome}: eps={dec.epsilon:.4f}")
    return build_decomposition_report(dec, pi, source="request")
