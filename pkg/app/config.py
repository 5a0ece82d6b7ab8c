"""
Configuration Module
====================

This module handles all configuration settings for the mitigation toolkit.
It uses Pydantic Settings for validation and type safety.

The configuration is loaded from:
1. Environment variables
2. .env file (if present)
3. Default values (tuned for desk-scale reproduction runs)

Numerical entry points read their defaults from here, but every one of them
also accepts explicit keyword arguments so that library calls stay pure.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path

from pydantic import Field, validator
from pydantic_settings import BaseSettings

# Repository root: fixtures ship next to the app package
REPO_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """
    Toolkit Settings Class

    All settings can be overridden by environment variables of the same name.

    Attributes:
        APP_ENV: Runtime environment (development, production)
        APP_NAME: Service name reported by the CLI and the HTTP health check
        MITIGATOR_FIXTURES: Directory holding the transcribed device fixtures
        DEFAULT_SEED: Seed used when a command is run without --seed
        OPTIMIZER_STARTS: Multistart count for the decomposition search
        OPTIMIZER_MAX_EVALS: Objective evaluations per start
        WITNESS_STARTS: Multistart count for the separability-window search
        CROSSTALK_REL_TOL: Relative singular-value threshold for crosstalk
        ... and the shot/repetition defaults of the harness
    """

    # ============================================================
    # Application Settings
    # ============================================================
    APP_ENV: str = Field(default="development", description="Runtime environment")
    APP_NAME: str = Field(default="Readout Mitigator", description="Application name")
    APP_VERSION: str = Field(default="1.0.0", description="Application version")
    DEBUG: bool = Field(default=True, description="Debug mode flag")

    # ============================================================
    # HTTP Server Configuration
    # ============================================================
    HOST: str = Field(default="127.0.0.1", description="Server host address")
    PORT: int = Field(default=8000, description="Server port number")

    # ============================================================
    # Fixtures
    # ============================================================
    MITIGATOR_FIXTURES: str = Field(
        default=str(REPO_ROOT / "fixtures"),
        description="Directory containing device fixtures (matrix JSON)"
    )
    FIXTURE_HERMITICITY_TOL: float = Field(
        default=1e-6,
        description="Largest Hermiticity defect a printed fixture may carry before load fails"
    )
    FIXTURE_PSD_TOL: float = Field(
        default=1e-3,
        description="Largest negative eigenvalue repaired (clipped) on fixture load"
    )

    # ============================================================
    # Optimizer Configuration
    # ============================================================
    DEFAULT_SEED: int = Field(default=7, description="Default seed for all randomized routines")
    OPTIMIZER_STARTS: int = Field(default=32, description="Multistart count (identity + seeded random)")
    OPTIMIZER_MAX_EVALS: int = Field(default=2000, description="Objective evaluations per start")
    OPTIMIZER_TOL: float = Field(default=1e-8, description="Convergence tolerance on the objective")
    WITNESS_STARTS: int = Field(default=64, description="Multistart count for separability bounds")
    CROSSTALK_REL_TOL: float = Field(
        default=1e-3,
        description="Second/first operator-Schmidt singular value ratio flagging crosstalk"
    )

    # ============================================================
    # Experiment Harness
    # ============================================================
    DEFAULT_SHOTS: int = Field(default=8192, description="Shots per circuit execution")
    DEFAULT_REPETITIONS: int = Field(default=15, description="Repetitions per table row")
    CONFUSION_COMPLETION_FLIP: float = Field(
        default=0.05,
        description="Bit-flip probability shaping the completion of a single published element"
    )

    # ============================================================
    # Logging Configuration
    # ============================================================
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FORMAT: str = Field(default="text", description="Log format (json or text)")

    # ============================================================
    # Validators
    # ============================================================

    @validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        """
        Normalize and validate the logging level name.

        Raises:
            ValueError: If the level is not a standard logging level
        """
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"LOG_LEVEL must be a standard logging level, got {v!r}")
        return level

    @validator("LOG_FORMAT")
    def validate_log_format(cls, v: str) -> str:
        if v not in ("json", "text"):
            raise ValueError("LOG_FORMAT must be 'json' or 'text'")
        return v

    @validator("OPTIMIZER_STARTS", "OPTIMIZER_MAX_EVALS", "WITNESS_STARTS", "DEFAULT_SHOTS", "DEFAULT_REPETITIONS")
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("value must be a positive integer")
        return v

    @validator("CONFUSION_COMPLETION_FLIP")
    def validate_flip(cls, v: float) -> float:
        if not 0.0 < v < 0.5:
            raise ValueError("CONFUSION_COMPLETION_FLIP must lie in (0, 0.5)")
        return v

    @property
    def fixtures_dir(self) -> Path:
        """Fixture directory as a Path."""
        return Path(self.MITIGATOR_FIXTURES)

    class Config:
        """
        Pydantic configuration class.

        Attributes:
            env_file: Path to .env file
            case_sensitive: Whether environment variable names are case-sensitive
        """
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    """
    Get toolkit settings with caching.

    Returns:
        Settings: Settings instance, loaded once per process

    Example:
        >>> from app.config import get_settings
        >>> get_settings().OPTIMIZER_STARTS
        32
    """
    return Settings()


# ============================================================
# Logging Setup
# ============================================================

class _JsonFormatter(logging.Formatter):
    """One JSON object per record, for LOG_FORMAT=json."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "time": self.formatTime(record),
            "logger": record.name,
            "level": record.levelname,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload)


def configure_logging(level: str | None = None) -> None:
    """
    Configure root logging once per process.

    Both entry points (CLI and HTTP service) call this before doing any work.

    Args:
        level: Override for settings.LOG_LEVEL
    """
    current = get_settings()
    logging.basicConfig(
        level=getattr(logging, (level or current.LOG_LEVEL).upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )
    if current.LOG_FORMAT == "json":
        for handler in logging.getLogger().handlers:
            handler.setFormatter(_JsonFormatter())


# ============================================================
# Export settings instance for easy import
# ============================================================
settings = get_settings()
