"""Sampled spectral densities; every kernel goes through quadrature."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..errors import DomainError
from ..models import KernelKind
from .base import Bath, TimeLike, as_times, check_beta, unwrap
from .quadrature import DEFAULT_TOLERANCE, kernel_by_quadrature

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TabulatedBath(Bath):
    """Spectral density given on a grid of frequencies.

    J is interpolated linearly between samples, from J(0) = 0 up to the first
    sample, and continued past the last sample by an exponential tail with the
    declared cutoff scale.
    """

    omega: np.ndarray
    values: np.ndarray
    cutoff_scale: float
    beta: float = float("inf")
    tolerance: float = DEFAULT_TOLERANCE
    source: str = field(default="", compare=False)

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.ndim != 1 or omega.size == 0 or omega.shape != values.shape:
            raise DomainError("spectral samples must be two equal-length one-dimensional arrays")
        if omega[0] <= 0:
            raise DomainError(f"first sample frequency must be positive, got {omega[0]}")
        if np.any(np.diff(omega) <= 0):
            raise DomainError("sample frequencies must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise DomainError("spectral density samples must be finite and nonnegative")
        if not self.cutoff_scale > 0:
            raise DomainError(f"cutoff scale must be positive, got {self.cutoff_scale}")
        omega.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "beta", check_beta(self.beta))

    @classmethod
    def from_file(
        cls,
        path: Union[str, Path],
        cutoff_scale: float,
        beta: float = float("inf"),
        tolerance: float = DEFAULT_TOLERANCE,
    ) -> "TabulatedBath":
        """Load a two-column (omega, J) whitespace-separated file; '#' starts a comment."""
        path = Path(path)
        if not path.exists():
            raise DomainError(f"spectrum file not found: {path}")
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns, found {data.shape[1]}")
        logger.info(f"Loaded {data.shape[0]} spectral samples from {path}")
        return cls(data[:, 0], data[:, 1], cutoff_scale, beta, tolerance, str(path))

    @property
    def support_end(self) -> float:
        return float(self.omega[-1])

    @property
    def knots(self) -> np.ndarray:
        """Sample frequencies, where the interpolated J has kinks."""
        return self.omega

    def spectral_density(self, omega):
        w = np.asarray(omega, dtype=float)
        inside = np.interp(w, np.concatenate(([0.0], self.omega)), np.concatenate(([0.0], self.values)))
        with np.errstate(over="ignore"):
            tail = self.values[-1] * np.exp(-(w - self.omega[-1]) / self.cutoff_scale)
        return np.where(w <= self.omega[-1], inside, tail)

    def density_over_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        slope = self.values[0] / self.omega[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.spectral_density(w) / np.where(w > 0, w, 1.0)
        out = np.where(w < self.omega[0], slope, ratio)
        return float(out) if out.ndim == 0 else out

    def integration_limit(self, t: float) -> float:
        limit = self.support_end + 40.0 * self.cutoff_scale
        if t > 0:
            limit = max(limit, 40.0 / t)
        return limit

    def _quad(self, kind: KernelKind, t: TimeLike, beta: float) -> TimeLike:
        arr, scalar = as_times(t)
        flat = [kernel_by_quadrature(self, kind, float(x), beta, self.tolerance).value for x in arr.ravel()]
        return unwrap(np.asarray(flat, dtype=float).reshape(arr.shape), scalar)

    def coupling_constant(self) -> float:
        return kernel_by_quadrature(self, KernelKind.C, 0.0, self.beta, self.tolerance).value

    def phi(self, t: TimeLike) -> TimeLike:
        return self._quad(KernelKind.PHI, t, self.beta)

    def gamma_kernel(self, t: TimeLike) -> TimeLike:
        return self._quad(KernelKind.B, t, self.beta)

    def gamma_kernel_vacuum(self, t: TimeLike) -> TimeLike:
        return self._quad(KernelKind.B, t, float("inf"))

    def gamma_kernel_thermal(self, t: TimeLike) -> TimeLike:
        if self.is_zero_temperature:
            arr, scalar = as_times(t)
            return unwrap(np.zeros_like(arr), scalar)
        return self.gamma_kernel(t) - self.gamma_kernel_vacuum(t)

    def delta_kernel(self, t: TimeLike) -> TimeLike:
        return self._quad(KernelKind.D, t, self.beta)

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info.update({"spectrum_file": self.source, "samples": int(self.omega.size), "cutoff_scale": self.cutoff_scale})
        return info
