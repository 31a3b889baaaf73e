"""Adaptive quadrature of the bath kernels for arbitrary cutoff spectra.

The frequency axis [0, omega_upper] is cut into panels a couple of
oscillation periods wide and each panel is integrated with QUADPACK.
What lies beyond omega_upper is bounded analytically from the exponential
cutoff and added to the error estimate.
"""

import logging
import math
import warnings
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from ..errors import AccuracyError, DomainError
from ..models import KernelKind, KernelValue
from ..special import sin_minus_identity

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
# Below beta*omega = 1e-4 coth is replaced by its Laurent series.
_LAURENT_BELOW = 1e-4
_PANEL_LIMIT = 200


def omega_coth(beta: float, omega: float) -> float:
    """omega * coth(beta * omega / 2), finite at omega = 0."""
    if math.isinf(beta):
        return omega
    y = beta * omega
    if y < _LAURENT_BELOW:
        return (2.0 + y * y / 6.0 - y ** 4 / 360.0) / beta
    return omega / math.tanh(0.5 * y)


def _integrand(kind: KernelKind, j_over_omega: Callable[[float], float], t: float, beta: float):
    # every factor below is written so it stays finite at omega = 0
    if kind is KernelKind.C:
        return lambda w: float(j_over_omega(w))
    if kind is KernelKind.PHI:
        return lambda w: float(j_over_omega(w)) * t * float(np.sinc(w * t / math.pi))

    if kind is KernelKind.B:

        def f(w):
            half = 0.5 * float(np.sinc(w * t / (2.0 * math.pi)))
            # (1 - cos wt)/w^2 = (t^2 / 2) sinc^2(wt/2)
            return float(j_over_omega(w)) * omega_coth(beta, w) * 2.0 * t * t * half * half

        return f

    def g(w):
        x = w * t
        if x == 0.0:
            return 0.0
        return float(j_over_omega(w)) * t * float(sin_minus_identity(x)) / x

    return g


def _tail_bound(kind: KernelKind, level: float, scale: float, upper: float, t: float, beta: float) -> float:
    """Bound on the integral beyond ``upper`` assuming J/omega decays like exp(-omega/scale)."""
    base = level * scale
    if kind is KernelKind.C:
        return base
    if kind is KernelKind.PHI:
        return base / upper
    if kind is KernelKind.B:
        return base * 2.0 * omega_coth(beta, upper) / upper ** 2
    return base * (t + 1.0 / upper)


def integrate_spectrum(
    bath,
    integrand: Callable[[float], float],
    t: float,
    tol: float = DEFAULT_TOLERANCE,
    tail: float = 0.0,
    label: str = "",
) -> KernelValue:
    """Integrate ``integrand`` over [0, omega_upper] panel by panel.

    ``integrand`` must already include the spectral density; ``t`` sets the
    oscillation scale and the upper limit. ``tail`` is an analytic bound on
    what lies past the upper limit and is added to the error estimate.

    Raises:
        AccuracyError: if the accumulated error exceeds ``tol`` relative to the value.
    """
    scale = float(bath.cutoff_scale)
    upper = float(bath.integration_limit(t))
    dense_end = min(upper, 40.0 * scale + getattr(bath, "support_end", 0.0))
    width = scale if t == 0.0 else min(scale, 4.0 * math.pi / t)
    edges = np.append(np.arange(0.0, dense_end, width), dense_end)
    knots = getattr(bath, "knots", None)
    if knots is not None:
        # piecewise spectra: keep every kink on a panel edge
        edges = np.union1d(edges, knots[knots < dense_end])
    if upper > dense_end:
        edges = np.append(edges, upper)

    value = 0.0
    error = 0.0
    flagged = 0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        # past the dense range the integrand is exponentially small
        epsabs = 0.1 * tol * abs(value) if a >= dense_end else 0.0
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            part, err = integrate.quad(integrand, a, b, epsabs=epsabs, epsrel=0.1 * tol, limit=_PANEL_LIMIT)
        if caught:
            flagged += 1
        value += part
        error += err

    error += tail
    logger.debug(f"quadrature {label} t={t:g}: {len(edges) - 1} panels, {flagged} flagged, err={error:.2e}")
    if flagged:
        logger.warning(f"quadrature {label} at t={t:g}: {flagged} panels reported integration warnings")
    if error > tol * abs(value) and error > 1e-300:
        raise AccuracyError(f"quadrature of {label} at t={t:g} did not converge", error, tol * abs(value))
    return KernelValue(value, error)


def kernel_by_quadrature(
    bath,
    kind: Union[KernelKind, str],
    t: float = 0.0,
    beta: Optional[float] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> KernelValue:
    """Evaluate C, Phi(t), B(t) or D(t) from the spectral density by quadrature.

    Args:
        bath: any model exposing ``density_over_omega``, ``cutoff_scale``
            and ``integration_limit`` (continuum baths).
        kind: which kernel.
        t: time for the time kernels.
        beta: inverse temperature for B; defaults to ``bath.beta``.
        tol: relative tolerance on the returned value.

    Raises:
        AccuracyError: if the accumulated error estimate exceeds ``tol``.
    """
    kind = KernelKind(kind)
    t = float(t)
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"time must be finite and nonnegative, got {t}")
    if not hasattr(bath, "density_over_omega"):
        raise DomainError(f"{type(bath).__name__} has no continuous spectral density")
    beta = bath.beta if beta is None else float(beta)

    if kind is not KernelKind.C and t == 0.0:
        return KernelValue(0.0, 0.0)

    upper = float(bath.integration_limit(t))
    level = float(bath.density_over_omega(upper))
    tail = _tail_bound(kind, level, float(bath.cutoff_scale), upper, t, beta)
    f = _integrand(kind, bath.density_over_omega, t, beta)
    return integrate_spectrum(bath, f, t, tol, tail, label=f"kernel {kind}")
