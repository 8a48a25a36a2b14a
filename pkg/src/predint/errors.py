"""Exception hierarchy shared by every module of the package."""


class PredintError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PredintError, ValueError):
    """A distribution or method parameter violates its constraints."""


class InvalidProbabilityError(InvalidParameterError):
    """A probability argument lies outside the admissible range."""


class DegenerateSampleError(PredintError, ValueError):
    """The sample does not identify the model (e.g. all values equal)."""


class NonConvergenceError(PredintError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The ``diagnostics`` attribute carries the last iterate and gradient norm.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnsupportedFamilyError(PredintError, ValueError):
    """The requested operation is not defined for this distribution family."""


class ExcessiveFailureError(PredintError, RuntimeError):
    """Too many Monte Carlo or bootstrap replicates had to be discarded."""

    def __init__(self, message, failures=0, total=0):
        super().__init__(message)
        self.failures = failures
        self.total = total


class EmptyBatchError(PredintError, ValueError):
    """A mixture was requested from zero components."""


class RootNotBracketedError(PredintError, RuntimeError):
    """A bracketing root finder was given an interval without a sign change."""


class TruncationError(PredintError, RuntimeError):
    """A truncated-support enumeration could not reach the required tail bound."""
