"""Finite set of bath modes; kernels are plain sums over modes."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Tuple

import numpy as np

from ..errors import DomainError
from ..special import coth_half, one_minus_cos, sin_minus_identity
from .base import Bath, TimeLike, as_times, check_beta, unwrap

logger = logging.getLogger(__name__)

Mode = Tuple[float, complex]


@dataclass(frozen=True)
class DiscreteBath(Bath):
    """Bath of K modes (omega_k, g_k) coupled through 2 J_z sum_k (g_k* b_k + g_k b_k^dagger).

    Only |g_k|^2 enters the kernels.
    """

    modes: Tuple[Mode, ...]
    beta: float = float("inf")

    def __post_init__(self):
        modes = tuple((float(w), complex(g)) for w, g in self.modes)
        if not modes:
            raise DomainError("a discrete bath needs at least one mode")
        for w, g in modes:
            if not np.isfinite(w) or w <= 0:
                raise DomainError(f"mode frequency must be positive, got {w}")
            if not np.isfinite(g):
                raise DomainError(f"mode coupling must be finite, got {g}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "beta", check_beta(self.beta))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Mode], beta: float = float("inf")) -> "DiscreteBath":
        return cls(tuple(pairs), beta)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def weights(self) -> np.ndarray:
        """4|g_k|^2 per mode."""
        return np.array([4.0 * abs(g) ** 2 for _, g in self.modes])

    def _sum(self, t: TimeLike, per_mode) -> TimeLike:
        arr, scalar = as_times(t)
        w = self.frequencies
        x = arr[..., None] * w
        total = np.sum(self.weights * per_mode(x, w), axis=-1)
        return unwrap(total, scalar)

    def coupling_constant(self) -> float:
        return float(np.sum(self.weights / self.frequencies))

    def phi(self, t: TimeLike) -> TimeLike:
        return self._sum(t, lambda x, w: np.sin(x) / w ** 2)

    def gamma_kernel_vacuum(self, t: TimeLike) -> TimeLike:
        return self._sum(t, lambda x, w: one_minus_cos(x) / w ** 2)

    def gamma_kernel_thermal(self, t: TimeLike) -> TimeLike:
        if self.is_zero_temperature:
            arr, scalar = as_times(t)
            return unwrap(np.zeros_like(arr), scalar)
        excess = np.asarray(coth_half(self.beta, self.frequencies)) - 1.0
        return self._sum(t, lambda x, w: one_minus_cos(x) * excess / w ** 2)

    def delta_kernel(self, t: TimeLike) -> TimeLike:
        return self._sum(t, lambda x, w: sin_minus_identity(x) / w ** 2)

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info["modes"] = [[w, g.real, g.imag] for w, g in self.modes]
        return info
