"""Exception types shared across the library.

The split mirrors the failure contract of the numerical layers: domain errors
are bad scalar inputs, precondition errors are structurally invalid requests,
accuracy errors carry the best available estimate together with the error
bound that failed, and bracket/fit errors are reportable solver outcomes
rather than crashes.
"""


class BcsTcLabError(Exception):
    """Base class for every library error."""


class DomainError(BcsTcLabError, ValueError):
    """Non-finite or out-of-domain scalar input."""


class PreconditionError(BcsTcLabError, ValueError):
    """A structural precondition of an operation was violated."""


class ConfigError(BcsTcLabError, ValueError):
    """Malformed or schema-violating run configuration."""


class AccuracyError(BcsTcLabError, RuntimeError):
    """Requested tolerance was not met.

    Carries the best estimate and the achieved error bound so callers can
    decide whether to keep the value anyway.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class NoBracketError(BcsTcLabError, RuntimeError):
    """No sign change found for a root solve within the allowed bracket."""


class FitError(BcsTcLabError, RuntimeError):
    """Too few usable points (or degenerate data) for a regression."""


class EigenSolveError(BcsTcLabError, RuntimeError):
    """Eigenvalue computation failed or produced non-finite output."""
