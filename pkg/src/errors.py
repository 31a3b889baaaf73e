"""Exception hierarchy shared by every module."""

from typing import Optional


class DephasingError(Exception):
    """Base class for all engine errors."""


class DomainError(DephasingError, ValueError):
    """Argument outside the domain of an operation."""


class AccuracyError(DephasingError, RuntimeError):
    """A numerical procedure could not reach its requested tolerance."""

    def __init__(self, message: str, estimate: float, tolerance: float):
        super().__init__(f"{message} (error estimate {estimate:.3e} > tolerance {tolerance:.3e})")
        self.estimate = estimate
        self.tolerance = tolerance


class DegenerateStateError(DephasingError, ValueError):
    """A state or density element has no normalizable weight."""


class SizeError(DephasingError, ValueError):
    """The requested oracle problem exceeds the dimension budget."""

    def __init__(self, dimension: int, budget: int):
        super().__init__(f"Hilbert space dimension {dimension} exceeds budget {budget}")
        self.dimension = dimension
        self.budget = budget


class SequenceError(DephasingError, ValueError):
    """Invalid pulse sequence."""


class ConfigError(DephasingError, ValueError):
    """Invalid run configuration."""

    def __init__(self, message: str, field: Optional[str] = None):
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}")
        self.field = field
