"""Exception hierarchy for the divide-and-discard observer.

Every error carries the CLI exit code that main.py reports when the error
escapes a command.
"""

from typing import Optional


class ObserverError(Exception):
    """Base class for all observer errors."""
    exit_code: int = 1


class ConfigError(ObserverError):
    """Scenario file or CLI flags are invalid."""
    exit_code = 2


class IntervalError(ObserverError):
    """Base class for interval arithmetic precondition violations."""


class DivisorContainsZero(IntervalError):
    pass


class NegativeDomain(IntervalError):
    pass


class DimensionMismatch(IntervalError):
    pass


class EmptyBox(IntervalError):
    pass


class DomainViolation(ObserverError):
    """A state enclosure left the domain where the model dynamics are defined."""
    exit_code = 4


class ZeroCoefficient(ObserverError):
    pass


class ZeroWidthSplit(ObserverError):
    pass


class NonpositiveScale(ObserverError):
    pass


class InitialStateOutsideX0(ObserverError):
    pass


class EmptyCollection(ObserverError):
    pass


class NonpositiveMetric(ObserverError):
    pass


class InconsistentMeasurements(ObserverError):
    """Every box was discarded by the measurement contraction.

    With sound arithmetic this only happens when the model or the noise
    bounds do not match the data that produced the measurements.
    """
    exit_code = 3

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
