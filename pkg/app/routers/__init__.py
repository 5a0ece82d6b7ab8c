"""
API Routers Package
===================

This package contains all API route handlers organized by feature:
- health: Health checks and fixture reachability
- decomposition: POVM element decomposition
- mitigation: Pre- and post-processing of one state
- witness: Witness operator and entanglement certification
"""

from app.routers import (
    decomposition,
    health,
    mitigation,
    witness
)

__all__ = [
    "decomposition",
    "health",
    "mitigation",
    "witness"
]
