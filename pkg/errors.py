"""
Exception hierarchy for hyperlab.

Precondition violations raise DomainError, numerical breakdowns raise a
NumericalError subclass. The CLI maps the two families onto distinct exit
statuses; verification failures are never exceptions, they are reports.
"""
from typing import Optional, Tuple


class LabError(Exception):
    """Base class for every error raised by hyperlab."""
    pass


class DomainError(LabError, ValueError):
    """Raised when an input lies outside its admissible window."""
    pass


class NumericalError(LabError, ArithmeticError):
    """Raised when a computation cannot be carried out reliably."""
    pass


class SimulationError(NumericalError):
    """Raised when a covariance matrix cannot be factorized after jitter."""
    pass


class QuadratureError(NumericalError):
    """Raised when node doubling changes an integral by more than the tolerance."""

    def __init__(self, message: str, coarse: float = float("nan"), fine: float = float("nan")):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class IntegrandOverflowError(NumericalError):
    """Raised when exp() in a B integrand overflows; carries the offending grid pair."""

    def __init__(self, message: str, pair: Optional[Tuple] = None, exponent: float = float("nan")):
        super().__init__(message)
        self.pair = pair
        self.exponent = exponent


class ModelLoadError(LabError):
    """Raised when a custom model file fails to load."""
    pass
