"""
Readout Mitigator Service
=========================

FastAPI application exposing the mitigation toolkit over HTTP, for notebook
and dashboard consumers. Every route calls the same library functions as
the CLI, and domain failures carry the CLI's error body.

Routes (all under /api/v1):
- /health                 service and fixture reachability
- /decompose              eps, V, P decomposition of a posted element
- /mitigate               pre- and post-processing of one posted state
- /witness/...            witness operator, certification and verdicts

Run the application:
    uvicorn main:app --reload --host 127.0.0.1 --port 8000
"""

from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.exceptions import RequestValidationError
from fastapi.encoders import jsonable_encoder
from contextlib import asynccontextmanager
import logging
import time
from typing import AsyncGenerator

from app.config import configure_logging, settings
from app.exceptions import MitigatorError
from app.routers import (
    decomposition,
    health,
    mitigation,
    witness
)

configure_logging()
logger = logging.getLogger(__name__)

API_V1_PREFIX = "/api/v1"

# (router, path below API_V1_PREFIX, OpenAPI tag)
ROUTES = (
    (health.router, "", "Health"),
    (decomposition.router, "", "Decomposition"),
    (mitigation.router, "", "Mitigation"),
    (witness.router, "/witness", "Witness"),
)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncGenerator:
    """Log the configuration in effect; a missing fixture directory is only a warning."""
    logger.info(f"Starting {settings.APP_NAME} v{settings.APP_VERSION} ({settings.APP_ENV})")
    logger.info(
        f"Optimizer: {settings.OPTIMIZER_STARTS} starts, {settings.OPTIMIZER_MAX_EVALS} evaluations, "
        f"seed {settings.DEFAULT_SEED}"
    )
    if not settings.fixtures_dir.is_dir():
        logger.warning(f"Fixture directory {settings.fixtures_dir} not found; fixture-backed checks will fail")
    yield
    logger.info(f"{settings.APP_NAME} stopped")


app = FastAPI(
    title=settings.APP_NAME,
    description="Readout-error mitigation and entanglement-witness certification",
    version=settings.APP_VERSION,
    docs_url="/api/docs" if settings.DEBUG else None,
    redoc_url="/api/redoc" if settings.DEBUG else None,
    lifespan=lifespan
)

# Read-only numerical service: any origin may call it, nothing uses cookies.
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


# ============================================================
# Middleware
# ============================================================

@app.middleware("http")
async def time_requests(request: Request, call_next):
    """
    Log each request with its duration and expose it as X-Process-Time.

    Decompositions run the multistart optimizer, so a slow request is
    usually a large element or a high ``starts`` value.
    """
    started = time.perf_counter()
    response = await call_next(request)
    elapsed = time.perf_counter() - started
    response.headers["X-Process-Time"] = f"{elapsed:.6f}"
    client = request.client.host if request.client else "-"
    logger.info(f"{request.method} {request.url.path} [{client}] -> {response.status_code} in {elapsed:.3f}s")
    return response


# ============================================================
# Exception Handlers
# ============================================================

@app.exception_handler(MitigatorError)
async def mitigator_exception_handler(request: Request, exc: MitigatorError):
    """Domain failures answer 422 with the {"error": {"kind", "message"}} body."""
    logger.warning(f"{exc.kind} error on {request.url.path}: {exc}")
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content=exc.to_dict())


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.warning(f"Rejected body on {request.url.path}: {len(exc.errors())} validation error(s)")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content=jsonable_encoder({"detail": exc.errors(), "body": exc.body})
    )


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Anything else is a bug: log the traceback, hide the detail in production."""
    logger.error(f"Unhandled exception on {request.url.path}: {exc}", exc_info=True)
    detail = "Internal server error" if settings.APP_ENV == "production" else str(exc)
    return JSONResponse(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, content={"detail": detail})


# ============================================================
# Routes
# ============================================================

@app.get("/api", tags=["Root"])
async def root():
    """Service summary with the mounted route prefixes."""
    return {
        "name": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "environment": settings.APP_ENV,
        "docs": "/api/docs" if settings.DEBUG else "disabled",
        "routes": sorted({f"{API_V1_PREFIX}{prefix}" for _, prefix, _ in ROUTES}),
        "status": "running"
    }


for router, prefix, tag in ROUTES:
    app.include_router(router, prefix=f"{API_V1_PREFIX}{prefix}", tags=[tag])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower()
    )
