"""Exception hierarchy shared by every python_hardyverify module."""

from typing import Optional


class HardyVerifyError(Exception):
    """Base class for python_hardyverify errors."""


class ValidationError(HardyVerifyError, ValueError):
    """
    A precondition on a parameter does not hold.

    Attributes:
        field: name of the offending parameter (N, n, lambda, support, ...),
            used by the CLI diagnostic.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def __str__(self) -> str:
        message = super().__str__()
        if self.field:
            return f"{self.field}: {message}"
        return message


class IntegrandError(HardyVerifyError, ArithmeticError):
    """An integrand returned NaN or Inf."""

    def __init__(self, message: str, point: Optional[float] = None):
        super().__init__(message)
        self.point = point


class ConvergenceError(HardyVerifyError, RuntimeError):
    """A caller refused a non-converged numerical result."""
