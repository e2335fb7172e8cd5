class CovercraftError(Exception):
    """Base class for errors raised by covercraft."""


class ParameterError(CovercraftError, ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(CovercraftError, ValueError):
    """Input values fall outside the mathematical domain of an operation."""


class InvariantError(CovercraftError):
    """A data structure invariant (monotonicity, nonzero rows, ...) is violated."""


class CapacityError(CovercraftError):
    """A construction would exceed the configured size guard."""


class NumericError(CovercraftError, FloatingPointError):
    """A non-finite value appeared during optimization."""
