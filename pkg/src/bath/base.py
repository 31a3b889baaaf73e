"""Common kernel interface shared by every bath model."""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..errors import DomainError
from ..models import KernelKind

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]


def as_times(t: TimeLike) -> Tuple[np.ndarray, bool]:
    """Coerce a time argument to a float array and report whether it was scalar.

    Raises:
        DomainError: if any time is negative or not finite.
    """
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("time must be finite")
    if np.any(arr < 0):
        raise DomainError(f"time must be nonnegative, got {arr.min():g}")
    return arr, arr.ndim == 0


def unwrap(values: np.ndarray, scalar: bool) -> TimeLike:
    return float(values) if scalar else values


class Bath(ABC):
    """A bosonic bath seen through its four kernels.

    Every model exposes the coupling constant C and the time kernels
    Phi(t), B(t) = t*gamma(t) and D(t) = t*Delta(t). Kernels accept a scalar
    or an array of nonnegative times and vanish at t = 0.
    """

    beta: float

    @abstractmethod
    def coupling_constant(self) -> float:
        """C = sum_k 4|g_k|^2 / omega_k."""

    @abstractmethod
    def phi(self, t: TimeLike) -> TimeLike:
        """Correlation phase kernel Phi(t)."""

    @abstractmethod
    def gamma_kernel_vacuum(self, t: TimeLike) -> TimeLike:
        """Zero-temperature part of B(t)."""

    @abstractmethod
    def gamma_kernel_thermal(self, t: TimeLike) -> TimeLike:
        """Thermal excess of B(t) over its vacuum part; zero when beta is infinite."""

    @abstractmethod
    def delta_kernel(self, t: TimeLike) -> TimeLike:
        """Bath-mediated twisting kernel D(t) = Phi(t) - C t."""

    def gamma_kernel(self, t: TimeLike) -> TimeLike:
        """Decoherence kernel B(t) = t * gamma(t)."""
        return self.gamma_kernel_vacuum(t) + self.gamma_kernel_thermal(t)

    def gamma_rate(self, t: TimeLike) -> TimeLike:
        """gamma(t) = B(t)/t, continued to 0 at the origin."""
        arr, scalar = as_times(t)
        kernel = np.asarray(self.gamma_kernel(arr), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.where(arr > 0, kernel / np.where(arr > 0, arr, 1.0), 0.0)
        return unwrap(rate, scalar)

    def delta_rate(self, t: TimeLike) -> TimeLike:
        """Delta(t) = D(t)/t, continued to 0 at the origin."""
        arr, scalar = as_times(t)
        kernel = np.asarray(self.delta_kernel(arr), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.where(arr > 0, kernel / np.where(arr > 0, arr, 1.0), 0.0)
        return unwrap(rate, scalar)

    def kernel(self, kind: Union[KernelKind, str], t: TimeLike = 0.0) -> TimeLike:
        """Dispatch on a kernel name."""
        kind = KernelKind(kind)
        if kind is KernelKind.C:
            return self.coupling_constant()
        if kind is KernelKind.PHI:
            return self.phi(t)
        if kind is KernelKind.B:
            return self.gamma_kernel(t)
        return self.delta_kernel(t)

    @property
    def is_zero_temperature(self) -> bool:
        return bool(np.isinf(self.beta))

    def describe(self) -> Dict[str, Any]:
        """Parameters echoed into run metadata."""
        return {"model": type(self).__name__, "beta": "inf" if self.is_zero_temperature else float(self.beta)}


def check_beta(beta: float) -> float:
    beta = float(beta)
    if np.isnan(beta) or beta <= 0:
        raise DomainError(f"beta must be positive (inf allowed), got {beta}")
    return beta
