"""Data models shared across the engine - core data structures."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np


class PreparationKind(str, Enum):
    """How the correlated initial state is prepared."""

    PROJECTIVE = "projective"
    UNITARY = "unitary"

    def __str__(self) -> str:
        return self.value


class CorrelationMode(str, Enum):
    """Which correlation factor multiplies the factorized evolution."""

    # Factorized initial state, F^c = 1
    NONE = "none"
    EXACT = "exact"
    LARGE_N = "large_N"

    def __str__(self) -> str:
        return self.value


class KernelKind(str, Enum):
    """Bath integrals with a closed form for the Ohmic spectrum."""

    C = "C"
    PHI = "phi"
    B = "B"
    D = "D"

    def __str__(self) -> str:
        return self.value


class SequenceType(str, Enum):
    """Pulse sequence families."""

    BANG_BANG = "bang_bang"
    UDD = "udd"
    EXPLICIT = "explicit"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class KernelValue:
    """Quadrature result with its error estimate."""

    value: float
    error: float = 0.0

    def __post_init__(self):
        if self.error < 0:
            raise ValueError("error estimate must be nonnegative")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CorrelationFactor:
    """Multiplicative factor distinguishing correlated from factorized coherences."""

    value: complex
    mode: CorrelationMode
    terms: int = 1  # l-terms kept after pruning


@dataclass(frozen=True)
class DensityElement:
    """Off-diagonal element of the reduced density matrix at one time."""

    twice_m: int
    twice_n: int
    t: float
    modulus_log: float  # ln of the decoherence factor, -(m-n)^2 B(t)
    phase: float
    value: complex
    correlation: Optional[CorrelationFactor] = None

    @property
    def m(self) -> float:
        return self.twice_m / 2

    @property
    def n(self) -> float:
        return self.twice_n / 2


@dataclass
class TimeSeries:
    """Ordered samples of one or more observables on a common time grid."""

    t: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1:
            raise ValueError("time grid must be one-dimensional")
        if self.t.size > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for name, values in list(self.columns.items()):
            self.add(name, values)

    def add(self, name: str, values) -> None:
        """Attach a column; complex columns are split into re/im."""
        values = np.asarray(values)
        if values.shape != self.t.shape:
            raise ValueError(f"column {name!r} has shape {values.shape}, expected {self.t.shape}")
        if np.iscomplexobj(values):
            self.columns.pop(name, None)
            self.columns[f"{name}_re"] = values.real.astype(float)
            self.columns[f"{name}_im"] = values.imag.astype(float)
        else:
            self.columns[name] = values.astype(float)

    @property
    def names(self) -> List[str]:
        return ["t", *self.columns.keys()]

    def __len__(self) -> int:
        return self.t.size
