"""Exception hierarchy shared by every module of the package."""


class APCodeError(Exception):
    """Base class for all errors raised by :mod:`apcodes`."""


class ValidationError(APCodeError, ValueError):
    """An input object violates a structural invariant."""


class DomainError(APCodeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParameterError(APCodeError, ValueError):
    """A tuning parameter (rounds, trials, ...) is out of range."""


class CapacityError(APCodeError, RuntimeError):
    """An exact computation would exceed a hard size cap."""

    def __init__(self, message, *, size=None, bound=None):
        super().__init__(message)
        self.size = size
        self.bound = bound


class InfeasibleParametersError(APCodeError, ValueError):
    """The requested rate parameters leave no positive rate."""

    def __init__(self, message, *, deficit):
        super().__init__(message)
        self.deficit = deficit


class ConfigurationError(APCodeError, ValueError):
    """An experiment configuration is malformed or infeasible."""
