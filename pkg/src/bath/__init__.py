"""Bath models and the kernels C, Phi(t), B(t) and D(t) they generate."""

from .base import Bath, as_times
from .discrete import DiscreteBath
from .ohmic import OhmicBath
from .quadrature import DEFAULT_TOLERANCE, integrate_spectrum, kernel_by_quadrature, omega_coth
from .tabulated import TabulatedBath

__all__ = [
    "Bath",
    "DEFAULT_TOLERANCE",
    "DiscreteBath",
    "OhmicBath",
    "TabulatedBath",
    "as_times",
    "integrate_spectrum",
    "kernel_by_quadrature",
    "omega_coth",
]
