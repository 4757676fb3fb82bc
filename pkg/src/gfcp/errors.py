"""Exception hierarchy shared by every module."""


class GfcpError(Exception):
    """Base class for all library errors."""


class ValidationError(GfcpError, ValueError):
    """Invalid parameters. ``field`` names the offending input."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(GfcpError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericError(GfcpError, ArithmeticError):
    """Base for failures of a numerical procedure."""


class ConvergenceError(NumericError):
    pass


class TruncationError(NumericError):
    pass


class CapError(NumericError):
    """A configured size cap (n, r, ...) would be exceeded."""


class GridError(NumericError):
    pass


class BudgetError(NumericError):
    pass


class FitError(NumericError):
    pass


class UnsupportedDist(GfcpError, TypeError):
    """The claim distribution has no analytic path for this operation."""
