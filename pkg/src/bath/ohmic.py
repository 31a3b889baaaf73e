"""Ohmic spectral density J(omega) = G omega exp(-omega/omega_c) in closed form."""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..errors import DomainError
from ..special import arctan_minus_identity, log_gamma_ratio_sq
from .base import Bath, TimeLike, as_times, check_beta, unwrap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OhmicBath(Bath):
    """Ohmic bath with coupling G, cutoff omega_c and inverse temperature beta.

    The continuum rule sum_k 4|g_k|^2 F(omega_k) -> int J(omega) F(omega) d omega
    fixes the normalization of J against the mode couplings.
    """

    G: float
    omega_c: float
    beta: float = float("inf")

    def __post_init__(self):
        if not np.isfinite(self.G) or self.G < 0:
            raise DomainError(f"G must be finite and nonnegative, got {self.G}")
        if not np.isfinite(self.omega_c) or self.omega_c <= 0:
            raise DomainError(f"omega_c must be positive, got {self.omega_c}")
        object.__setattr__(self, "beta", check_beta(self.beta))

    @property
    def cutoff_scale(self) -> float:
        return self.omega_c

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.G * omega * np.exp(-omega / self.omega_c)

    def density_over_omega(self, omega):
        """J(omega)/omega, finite at omega = 0."""
        return self.G * np.exp(-np.asarray(omega, dtype=float) / self.omega_c)

    def integration_limit(self, t: float) -> float:
        x = self.omega_c * t
        return self.omega_c * max(40.0, 40.0 / min(1.0, x)) if x > 0 else 40.0 * self.omega_c

    def coupling_constant(self) -> float:
        return self.G * self.omega_c

    def phi(self, t: TimeLike) -> TimeLike:
        arr, scalar = as_times(t)
        return unwrap(self.G * np.arctan(self.omega_c * arr), scalar)

    def gamma_kernel_vacuum(self, t: TimeLike) -> TimeLike:
        arr, scalar = as_times(t)
        x = self.omega_c * arr
        return unwrap(0.5 * self.G * np.log1p(x * x), scalar)

    def gamma_kernel_thermal(self, t: TimeLike) -> TimeLike:
        arr, scalar = as_times(t)
        if self.is_zero_temperature or self.G == 0:
            return unwrap(np.zeros_like(arr), scalar)
        a = 1.0 + 1.0 / (self.beta * self.omega_c)
        return unwrap(self.G * np.asarray(log_gamma_ratio_sq(a, arr / self.beta)), scalar)

    def delta_kernel(self, t: TimeLike) -> TimeLike:
        arr, scalar = as_times(t)
        return unwrap(self.G * np.asarray(arctan_minus_identity(self.omega_c * arr)), scalar)

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info.update({"G": self.G, "omega_c": self.omega_c})
        return info
