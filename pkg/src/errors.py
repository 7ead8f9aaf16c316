"""
Exception types shared by the library and the command line front end.
"""

from typing import Any, Optional


class CjsrError(Exception):
    """Base class for every error raised by this package."""


class InputError(CjsrError, ValueError):
    """An argument is outside the domain of the operation."""


class CapExceededError(CjsrError):
    """An enumeration or dimension cap was hit.

    Args:
        cap_name: which cap (``max_paths``, ``max_cycles``, ``max_lifted_dim``)
        limit: the configured value of the cap
    """

    def __init__(self, cap_name: str, limit: int, detail: str = ""):
        self.cap_name = cap_name
        self.limit = limit
        message = f"{cap_name} cap of {limit} exceeded"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class InvalidSystemError(CjsrError):
    """A system description parsed but violates a structural invariant."""

    def __init__(self, report: Any):
        self.report = report
        super().__init__("; ".join(report.problems) or "invalid system")


class SystemFileError(CjsrError):
    """A system file could not be read or does not match the schema."""


class EstimationError(CjsrError):
    """Bisection could not produce an interval (every probe indeterminate)."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
