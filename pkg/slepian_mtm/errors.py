"""
Exception hierarchy for slepian-mtm

Every error carries the process exit code the CLI reports for it:
2 for validation failures, 3 for numerical failures.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class SlepianError(Exception):
    """Base class for all library errors"""

    exit_code: int = EXIT_VALIDATION


class ParameterDomainError(SlepianError, ValueError):
    """Parameters outside the domain of the method (N, W, K, spectra, bands)"""


class DegenerateBandwidthError(ParameterDomainError):
    """W <= 1/(2N): the critical taper count floor(2NW) is zero"""


class PreconditionError(SlepianError, ValueError):
    """An operation was called on inputs that violate its precondition"""


class GridMismatchError(PreconditionError):
    """Two grid functions do not live on the same frequency grid"""


class NumericalError(SlepianError, ArithmeticError):
    """A numerical routine failed; `diagnostics` says what was observed"""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({details})"


class ConsistencyError(NumericalError):
    """Computed quantities violate a mathematical identity beyond tolerance"""
