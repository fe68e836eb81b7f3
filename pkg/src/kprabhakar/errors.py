"""Exception types shared across the package."""


class KPrabhakarError(Exception):
    """Base class for all library errors."""


class DomainError(KPrabhakarError, ValueError):
    """A parameter or argument is outside its mathematical domain."""


class TruncationError(KPrabhakarError, RuntimeError):
    """A series did not reach the requested tolerance within max_terms.

    Carries the partial sum and the magnitude of the last computed term so
    callers can decide whether the partial result is usable.
    """

    def __init__(self, message, partial_sum=None, last_term=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class DivergenceError(KPrabhakarError, RuntimeError):
    """A solution series is numerically divergent for the given inputs."""


class HorizonError(KPrabhakarError, RuntimeError):
    """No finite truncation horizon can push the transform tail below tol."""


class EvaluationError(KPrabhakarError, RuntimeError):
    """A supplied callable produced non-finite values."""


class ConfigError(KPrabhakarError, ValueError):
    """A job configuration document failed to parse or validate."""
