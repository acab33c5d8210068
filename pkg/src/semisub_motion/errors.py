"""Exception hierarchy shared across the package."""


class SemisubError(Exception):
    """Base class for all package errors."""


class DomainError(SemisubError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(SemisubError, ValueError):
    """A configuration is inconsistent or infeasible (e.g. dt too coarse)."""


class NumericalError(SemisubError, ArithmeticError):
    """A computation produced non-finite values or failed to converge."""


class DegenerateDataError(SemisubError, ValueError):
    """Input data carries no usable signal (e.g. zero variance)."""
