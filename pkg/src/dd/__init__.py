"""Dynamical decoupling: pulse sequences, the filter function and the pulsed kernels.

Pulses are ideal instantaneous pi rotations about x. Between pulses the
switching function f(t) is +1 or -1; with nodes t_0 = 0 < t_1 < ... <
t_{N_d} < t_{N_d+1} = t the filter function is sum_p c_p e^{i omega t_p}
with c_0 = 1, c_p = 2(-1)^p and c_{N_d+1} = (-1)^{N_d+1}.

The decoherence kernel under pulses is normalized as
B~ = (1/2) int J coth |f|^2 / omega^2, so an empty sequence gives B(t) back.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from ..bath import Bath, integrate_spectrum
from ..dynamics import DephasingEngine
from ..errors import DomainError, SequenceError
from ..models import CorrelationMode, SequenceType
from ..special import sin_minus_identity
from ..spin import PreparedState

logger = logging.getLogger(__name__)

TIME_MATCH = 1e-12


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pi-pulse timings strictly inside (0, total_time)."""

    total_time: float
    timings: Tuple[float, ...] = ()
    generator: SequenceType = SequenceType.EXPLICIT
    interval: Optional[float] = None

    def __post_init__(self):
        total = float(self.total_time)
        if not math.isfinite(total) or total <= 0:
            raise SequenceError(f"total time must be positive, got {self.total_time}")
        timings = tuple(float(x) for x in self.timings)
        for k, x in enumerate(timings):
            if not 0 < x < total:
                raise SequenceError(f"pulse {k + 1} at t={x:g} is not strictly inside (0, {total:g})")
            if k and x <= timings[k - 1]:
                raise SequenceError(
                    f"pulse timings must be strictly increasing: pulse {k + 1} at {x:g} follows {timings[k - 1]:g}"
                )
        object.__setattr__(self, "total_time", total)
        object.__setattr__(self, "timings", timings)
        object.__setattr__(self, "generator", SequenceType(self.generator))

    @property
    def n_pulses(self) -> int:
        return len(self.timings)

    @property
    def nodes(self) -> np.ndarray:
        """t_0 = 0, the pulse times, t_{N_d+1} = total_time."""
        return np.array([0.0, *self.timings, self.total_time])

    @property
    def coefficients(self) -> np.ndarray:
        return switching_coefficients(self.n_pulses)

    @property
    def signs(self) -> np.ndarray:
        """Value of the switching function on each of the N_d + 1 intervals."""
        return (-1.0) ** np.arange(self.n_pulses + 1)

    def truncated(self, t: float) -> "PulseSequence":
        """The same pulse train observed on [0, t]."""
        if not 0 < t <= self.total_time * (1 + TIME_MATCH):
            raise SequenceError(f"truncation time {t:g} outside (0, {self.total_time:g}]")
        if abs(t - self.total_time) <= TIME_MATCH * self.total_time:
            return self
        kept = tuple(x for x in self.timings if x < t)
        return PulseSequence(t, kept, SequenceType.EXPLICIT)

    def timings_mp(self, dps: int) -> List[mpmath.mpf]:
        """Pulse times recomputed at ``dps`` decimal digits from the generating rule."""
        n = self.n_pulses
        with mpmath.workdps(dps):
            total = mpmath.mpf(self.total_time)
            if self.generator is SequenceType.UDD:
                return [+(total * mpmath.sin(j * mpmath.pi / (2 * n + 2)) ** 2) for j in range(1, n + 1)]
            if self.generator is SequenceType.BANG_BANG:
                if self.interval is not None:
                    return [+(mpmath.mpf(self.interval) * l) for l in range(1, n + 1)]
                return [+(total * l / (n + 1)) for l in range(1, n + 1)]
            return [mpmath.mpf(x) for x in self.timings]

    def describe(self) -> dict:
        info = {"type": str(self.generator), "total_time": self.total_time, "n_pulses": self.n_pulses}
        if self.interval is not None:
            info["interval"] = self.interval
        return info


def switching_coefficients(n_pulses: int) -> np.ndarray:
    """c_0 = 1, c_p = 2(-1)^p, c_{N_d+1} = (-1)^{N_d+1}; they sum to zero."""
    if n_pulses < 0:
        raise SequenceError(f"pulse count must be nonnegative, got {n_pulses}")
    c = 2 * (-1) ** np.arange(n_pulses + 2)
    c[0] = 1
    c[-1] = (-1) ** (n_pulses + 1)
    return c


def bang_bang(total_time: float, n_pulses: int) -> PulseSequence:
    """Equidistant pulses t_l = l t/(N_d + 1)."""
    if n_pulses < 0:
        raise SequenceError(f"pulse count must be nonnegative, got {n_pulses}")
    timings = tuple(l * total_time / (n_pulses + 1) for l in range(1, n_pulses + 1))
    return PulseSequence(total_time, timings, SequenceType.BANG_BANG)


def bang_bang_interval(total_time: float, tau: float) -> PulseSequence:
    """Pulses every ``tau`` up to, not including, ``total_time``."""
    if not tau > 0:
        raise SequenceError(f"pulse interval must be positive, got {tau}")
    ratio = total_time / tau
    n_pulses = int(math.ceil(ratio - 1e-9)) - 1
    if abs(ratio - round(ratio)) < 1e-9:
        # commensurate: identical to the count-based construction
        return bang_bang(total_time, int(round(ratio)) - 1)
    timings = tuple(l * tau for l in range(1, n_pulses + 1))
    return PulseSequence(total_time, timings, SequenceType.BANG_BANG, interval=tau)


def udd(total_time: float, n_pulses: int) -> PulseSequence:
    """Uhrig sequence t_j = t sin^2(j pi / (2 N_d + 2))."""
    if n_pulses < 1:
        raise SequenceError(f"UDD needs at least one pulse, got {n_pulses}")
    timings = tuple(total_time * math.sin(j * math.pi / (2 * n_pulses + 2)) ** 2 for j in range(1, n_pulses + 1))
    return PulseSequence(total_time, timings, SequenceType.UDD)


def build_sequence(
    kind: Union[SequenceType, str],
    total_time: float,
    n_pulses: Optional[int] = None,
    interval: Optional[float] = None,
    timings: Optional[Sequence[float]] = None,
) -> PulseSequence:
    """Sequence from a config-style description."""
    kind = SequenceType(kind)
    if kind is SequenceType.EXPLICIT:
        if timings is None:
            raise SequenceError("explicit sequence needs timings")
        return PulseSequence(total_time, tuple(timings), SequenceType.EXPLICIT)
    if kind is SequenceType.BANG_BANG and interval is not None:
        return bang_bang_interval(total_time, interval)
    if n_pulses is None:
        raise SequenceError(f"{kind} sequence needs n_pulses")
    return bang_bang(total_time, n_pulses) if kind is SequenceType.BANG_BANG else udd(total_time, n_pulses)


def filter_f(seq: PulseSequence, omega, dps: Optional[int] = None):
    """f(omega, t) = sum_p c_p e^{i omega t_p}.

    With ``dps`` the sum runs in mpmath at that many digits, which resolves
    the low-frequency cancellation of high-order sequences.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("filter function needs omega >= 0")
    c = seq.coefficients
    if dps is None:
        out = np.exp(1j * w[..., None] * seq.nodes) @ c
        return complex(out) if out.ndim == 0 else out

    with mpmath.workdps(dps):
        nodes = [mpmath.mpf(0), *seq.timings_mp(dps), mpmath.mpf(seq.total_time)]
        flat = [complex(mpmath.fsum(int(cp) * mpmath.expj(mpmath.mpf(x) * tp) for cp, tp in zip(c, nodes))) for x in w.ravel()]
    out = np.array(flat, dtype=complex).reshape(w.shape)
    return complex(out) if out.ndim == 0 else out


def tilde_omega0(seq: PulseSequence, omega0: float) -> float:
    """omega0 averaged over the switching function, (omega0/t) int_0^t f."""
    lengths = np.diff(seq.nodes)
    return float(omega0 * np.sum(seq.signs * lengths) / seq.total_time)


def tilde_gamma_kernel(seq: PulseSequence, bath: Bath) -> float:
    """B~ = -(1/2) sum_{p,q} c_p c_q B(|t_p - t_q|)."""
    c = seq.coefficients.astype(float)
    nodes = seq.nodes
    gaps = np.abs(nodes[:, None] - nodes[None, :])
    upper = np.triu_indices(nodes.size, k=1)
    kernel = np.asarray(bath.gamma_kernel(gaps[upper]))
    value = -float(np.sum(c[upper[0]] * c[upper[1]] * kernel))
    if value < 0:
        if value < -1e-12 * max(1.0, float(np.max(kernel, initial=0.0))):
            logger.warning(f"pulsed decoherence kernel {value:.3e} clipped to zero")
        value = 0.0
    return value


def _interval_pairs(seq: PulseSequence) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Corner weights and arguments over ordered interval pairs j < i, plus interval lengths and signs.

    Each row i, j contributes f_i f_j [G(a_i - d_j) - G(b_i - d_j) - G(a_i - c_j) + G(b_i - c_j)]
    where [a_i, b_i] is the later interval and [c_j, d_j] the earlier one.
    """
    nodes = seq.nodes
    starts, ends = nodes[:-1], nodes[1:]
    signs = seq.signs
    i, j = np.tril_indices(signs.size, k=-1)
    ff = signs[i] * signs[j]
    u = np.stack([starts[i] - ends[j], ends[i] - ends[j], starts[i] - starts[j], ends[i] - starts[j]], axis=1)
    corners = np.array([1.0, -1.0, -1.0, 1.0])
    weights = ff[:, None] * corners[None, :]
    return weights.ravel(), np.clip(u.ravel(), 0.0, None), ends - starts, signs


def tilde_delta_kernel(seq: PulseSequence, bath: Bath, method: str = "kernel", tol: Optional[float] = None) -> float:
    """D~ = int J(omega) int_0^t dt1 int_0^t1 dt2 f(t1) f(t2) sin(omega (t2 - t1)) d omega.

    ``kernel`` evaluates the interval-pair combination with the bath's own D;
    ``quadrature`` applies the same combination to (sin x - x)/omega^2 inside
    an adaptive frequency integral.
    """
    weights, u, lengths, _ = _interval_pairs(seq)
    if method == "kernel":
        own = float(np.sum(np.atleast_1d(bath.delta_kernel(lengths))))
        cross = float(np.sum(weights * np.atleast_1d(bath.delta_kernel(u)))) if u.size else 0.0
        return own + cross
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}; expected 'kernel' or 'quadrature'")
    if not hasattr(bath, "density_over_omega"):
        raise DomainError(f"{type(bath).__name__} has no continuous spectral density")

    all_u = np.concatenate([lengths, u])
    all_w = np.concatenate([np.ones_like(lengths), weights])

    def integrand(w: float) -> float:
        if w == 0.0:
            return 0.0
        x = w * all_u
        safe = np.where(x > 0, x, 1.0)
        ratio = np.where(x > 0, np.asarray(sin_minus_identity(safe)) / safe, 0.0)
        return float(bath.density_over_omega(w)) * float(np.sum(all_w * all_u * ratio))

    t = seq.total_time
    upper = float(bath.integration_limit(t))
    tail = float(bath.density_over_omega(upper)) * bath.cutoff_scale * np.sum(np.abs(all_w)) * (t + 1.0 / upper) / upper
    kwargs = {} if tol is None else {"tol": tol}
    return integrate_spectrum(bath, integrand, t, tail=float(tail), label="pulsed twisting kernel", **kwargs).value


def tilde_correlation_phase(seq: PulseSequence, bath: Bath) -> float:
    """S = sum_p c_p Phi(t_p); pulsed correlation factor is e^{-i N (n-m) S}."""
    phi = np.atleast_1d(bath.phi(seq.nodes))
    return float(np.sum(seq.coefficients * phi))


@dataclass(frozen=True)
class PulsedKernels:
    """The four pulse-modified quantities at the end of a sequence."""

    total_time: float
    omega0_tilde: float
    B_tilde: float
    D_tilde: float
    S: float

    def as_dict(self) -> dict:
        return {
            "t": self.total_time,
            "omega0_tilde": self.omega0_tilde,
            "B_tilde": self.B_tilde,
            "D_tilde": self.D_tilde,
            "S": self.S,
        }


def pulsed_kernels(seq: PulseSequence, bath: Bath, omega0: float, method: str = "kernel") -> PulsedKernels:
    return PulsedKernels(
        seq.total_time,
        tilde_omega0(seq, omega0),
        tilde_gamma_kernel(seq, bath),
        tilde_delta_kernel(seq, bath, method),
        tilde_correlation_phase(seq, bath),
    )


def _engine_jx(engine: DephasingEngine, seq: PulseSequence, mode: CorrelationMode) -> float:
    k = pulsed_kernels(seq, engine.bath, engine.omega0)
    return engine.jx_from_kernels(k.omega0_tilde * k.total_time, k.B_tilde, k.D_tilde, -k.S, mode)


def jx_with_dd(
    t: float,
    seq: PulseSequence,
    N: int,
    bath: Bath,
    state=None,
    correlation_mode: Union[CorrelationMode, str] = CorrelationMode.EXACT,
    omega0: float = 0.0,
) -> float:
    """j_x at the end of ``seq`` with omega0, B, D and F^c replaced by their pulsed forms."""
    if abs(seq.total_time - t) > TIME_MATCH * max(1.0, t):
        raise SequenceError(f"sequence ends at {seq.total_time:g}, evaluation time is {t:g}")
    state = PreparedState.coherent(N) if state is None else state
    return _engine_jx(DephasingEngine(bath, state, omega0), seq, CorrelationMode(correlation_mode))


def jx_with_dd_series(
    times: Iterable[float], seq: PulseSequence, engine: DephasingEngine, mode: Union[CorrelationMode, str]
) -> np.ndarray:
    """j_x(t') for the pulse train of ``seq`` observed up to each t' in ``times``."""
    mode = CorrelationMode(mode)
    out = []
    for t in times:
        if t == 0:
            out.append(engine.jx_from_kernels(0.0, 0.0, 0.0, 0.0, mode))
        else:
            out.append(_engine_jx(engine, seq.truncated(float(t)), mode))
    return np.asarray(out, dtype=float)
