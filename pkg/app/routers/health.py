"""
Health Check Router
===================

Provides endpoints for monitoring service health and status.

Endpoints:
- GET /health - Basic health check
- GET /health/detailed - Fixture directory and optimizer configuration
"""

from fastapi import APIRouter, status
from typing import Dict
import logging

from app.config import get_settings

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get(
    "/health",
    status_code=status.HTTP_200_OK,
    response_model=Dict[str, str]
)
async def health_check():
    """
    Basic health check endpoint.

    Returns:
        dict: Service name, version and fixture directory reachability
    """
    current = get_settings()
    fixtures = "reachable" if current.fixtures_dir.is_dir() else "missing"
    if fixtures == "missing":
        logger.warning(f"Fixture directory {current.fixtures_dir} not found")
    return {
        "status": "healthy" if fixtures == "reachable" else "degraded",
        "service": current.APP_NAME,
        "version": current.APP_VERSION,
        "fixtures": fixtures,
    }


@router.get(
    "/health/detailed",
    status_code=status.HTTP_200_OK,
    response_model=Dict
)
async def detailed_health_check():
    """
    Detailed health check with the numerical configuration in effect.

    Example Response:
        {
            "status": "healthy",
            "service": "Readout Mitigator",
            "fixtures": {"directory": "/srv/fixtures", "count": 11},
            "optimizer": {"starts": 32, "max_evals": 2000, "seed": 7}
        }
    """
    current = get_settings()
    directory = current.fixtures_dir
    count = len(list(directory.glob("*.json"))) if directory.is_dir() else 0
    return {
        "status": "healthy" if count else "degraded",
        "service": current.APP_NAME,
        "version": current.APP_VERSION,
        "environment": current.APP_ENV,
        "fixtures": {"directory": str(directory), "count": count},
        "optimizer": {
            "starts": current.OPTIMIZER_STARTS,
            "max_evals": current.OPTIMIZER_MAX_EVALS,
            "seed": current.DEFAULT_SEED,
        },
    }
