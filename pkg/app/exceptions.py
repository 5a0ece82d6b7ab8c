"""
Exception Hierarchy
===================

Every failure the toolkit reports on purpose derives from MitigatorError.
Each class carries a machine-readable ``kind`` and the process exit code the
CLI uses for it:

- io (2): a fixture or input file is missing or unreadable
- parse (3): a file is not valid JSON or does not match its schema
- usage (4): bad command-line usage
- numerical (5): a numerical precondition or validation failed

Numerical errors are also ValueErrors so library callers can catch them the
usual way.
"""

from typing import Any, Dict


class MitigatorError(Exception):
    """Base class for all reported failures."""

    kind: str = "internal"
    exit_code: int = 1

    def to_dict(self) -> Dict[str, Any]:
        """Error body shared by the CLI (stderr) and the HTTP service."""
        return {"error": {"kind": self.kind, "message": str(self)}}


class FixtureIOError(MitigatorError):
    kind = "io"
    exit_code = 2


class FixtureParseError(MitigatorError):
    kind = "parse"
    exit_code = 3


class UsageError(MitigatorError):
    kind = "usage"
    exit_code = 4


class NumericalValidationError(MitigatorError, ValueError):
    kind = "numerical"
    exit_code = 5


class DimensionMismatchError(NumericalValidationError):
    """Operands act on different Hilbert-space dimensions."""


class NotHermitianError(NumericalValidationError):
    """An operator required to be Hermitian is not, beyond tolerance."""


class NotPositiveError(NumericalValidationError):
    """An operator required to be positive semidefinite is not, beyond tolerance."""


class InvalidParameterError(NumericalValidationError):
    """A scalar parameter (epsilon, p, shots, ...) is outside its domain."""
