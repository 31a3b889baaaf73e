"""Scalar special functions for the Ohmic closed forms and large-N combinatorics.

Complex log-gamma comes from :func:`scipy.special.loggamma` (principal branch,
accurate to a few ulp on Re(z) >= 1). The helpers here add pole checks and
cancellation-free forms of the differences the bath kernels need.
"""

import logging
from typing import Union

import numpy as np
from scipy import special as sp

from ..errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Series cut-overs; below these the closed differences lose digits.
_SMALL_SIN = 0.5
_SMALL_ATAN = 0.25
_HURWITZ_RATIO = 0.25
_HURWITZ_TERMS = 24


def log_gamma_complex(z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """Principal-branch ln Gamma(z).

    Raises:
        DomainError: if ``z`` is a pole of Gamma (non-positive real integer).
    """
    arr = np.asarray(z, dtype=complex)
    poles = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(poles):
        bad = arr[poles].ravel()[0]
        raise DomainError(f"Gamma has a pole at z = {bad.real:g}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("log-gamma argument must be finite")
    out = sp.loggamma(arr)
    return complex(out) if np.ndim(z) == 0 else out


def log_gamma_ratio_sq(a: float, y: ArrayLike) -> ArrayLike:
    """ln(|Gamma(a)|^2 / |Gamma(a + iy)|^2) for real a >= 1.

    Small |y| uses the Hurwitz-zeta series
    sum_k (-1)^(k+1) y^(2k) zeta(2k, a) / k, which avoids subtracting two
    nearly equal log-gammas.
    """
    if a < 1:
        raise DomainError(f"log_gamma_ratio_sq requires a >= 1, got {a}")
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) <= _HURWITZ_RATIO * a

    if np.any(small):
        k = np.arange(1, _HURWITZ_TERMS + 1)
        coeff = (-1.0) ** (k + 1) * sp.zeta(2 * k, a) / k
        y2 = y[small][..., None] ** 2
        out[small] = np.sum(coeff * y2 ** k, axis=-1)
    if np.any(~small):
        big = y[~small]
        out[~small] = 2.0 * (sp.gammaln(a) - log_gamma_complex(a + 1j * big).real)
    return float(out) if out.ndim == 0 else out


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) through log-gamma differences."""
    n, k = int(n), int(k)
    if n < 0 or k < 0:
        raise DomainError(f"log_binomial requires nonnegative arguments, got ({n}, {k})")
    if k > n:
        raise DomainError(f"log_binomial requires k <= n, got k={k} > n={n}")
    # symmetric form so (n, k) and (n, n-k) round identically
    lo, hi = min(k, n - k), max(k, n - k)
    return float(sp.gammaln(n + 1) - sp.gammaln(lo + 1) - sp.gammaln(hi + 1))


def log_binomial_array(n: int, k: np.ndarray) -> np.ndarray:
    """Vectorized :func:`log_binomial` over an integer array ``k``."""
    k = np.asarray(k, dtype=np.int64)
    if np.any((k < 0) | (k > n)):
        raise DomainError(f"log_binomial_array requires 0 <= k <= {n}")
    lo = np.minimum(k, n - k)
    hi = np.maximum(k, n - k)
    return sp.gammaln(n + 1) - sp.gammaln(lo + 1) - sp.gammaln(hi + 1)


def sin_minus_identity(x: ArrayLike) -> ArrayLike:
    """sin(x) - x without cancellation near zero."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.sin(x) - x
    small = np.abs(x) < _SMALL_SIN
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        term = -xs * x2 / 6.0
        acc = term.copy()
        for j in range(2, 11):
            term = -term * x2 / ((2 * j) * (2 * j + 1))
            acc += term
        out[small] = acc
    return float(out[0]) if scalar else out


def arctan_minus_identity(x: ArrayLike) -> ArrayLike:
    """arctan(x) - x without cancellation near zero."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.arctan(x) - x
    small = np.abs(x) < _SMALL_ATAN
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        power = xs * x2
        acc = np.zeros_like(xs)
        for j in range(1, 21):
            acc += (-1.0) ** j * power / (2 * j + 1)
            power = power * x2
        out[small] = acc
    return float(out[0]) if scalar else out


def one_minus_cos(x: ArrayLike) -> ArrayLike:
    """1 - cos(x) as 2 sin^2(x/2)."""
    s = np.sin(np.asarray(x, dtype=float) / 2.0)
    out = 2.0 * s * s
    return float(out) if np.ndim(out) == 0 else out


def coth_half(beta: float, omega: ArrayLike) -> ArrayLike:
    """coth(beta * omega / 2), with beta = inf meaning coth -> 1.

    Below beta*omega = 1e-4 the Laurent series 2/y + y/6 - y^3/360 (y = beta*omega)
    replaces the direct ratio.
    """
    omega = np.asarray(omega, dtype=float)
    if np.isinf(beta):
        out = np.ones_like(omega)
        return float(out) if out.ndim == 0 else out
    y = beta * omega
    out = np.empty_like(y)
    small = np.abs(y) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = 1.0 / np.tanh(y[~small] / 2.0)
        ys = y[small]
        out[small] = 2.0 / ys + ys / 6.0 - ys ** 3 / 360.0
    return float(out) if out.ndim == 0 else out
