"""Reduced density matrix and j_x for factorized and correlated initial states.

Every phase is built from the kernels B(t), D(t) and Phi(t) directly; the
per-unit-time rates never enter. Coherences of the N+1 level multiplet are
summed in log space so N in the tens of thousands stays finite.
"""

import logging
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..bath import Bath, as_times
from ..errors import DegenerateStateError, DomainError
from ..models import CorrelationFactor, CorrelationMode, DensityElement, PreparationKind
from ..spin import (
    CollectiveSpin,
    PreparationWeights,
    PreparedState,
    log_boltzmann_weights,
    preparation_weights,
)

logger = logging.getLogger(__name__)

# ln(1e-20): weights below this fraction of the largest are dropped
PRUNE_LOG_RATIO = 46.0
DEGENERATE_BELOW = 1e-300


def _pair_log_coefficients(N: int) -> np.ndarray:
    """ln sqrt((N/2 - m)(N/2 + m + 1)) for m = -N/2 .. N/2 - 1, the J_+ matrix elements."""
    i = np.arange(N)
    return 0.5 * (np.log(N - i) + np.log(i + 1.0))


def _shifted_sum(log_terms: np.ndarray, phases: np.ndarray) -> Tuple[float, complex]:
    """Sum exp(log_terms) * phases as (shift, reduced sum) with the largest term scaled to 1."""
    finite = np.isfinite(log_terms)
    if not np.any(finite):
        return -np.inf, 0j
    shift = float(np.max(log_terms[finite]))
    reduced = np.sum(np.exp(log_terms[finite] - shift) * phases[finite])
    return shift, complex(reduced)


class DephasingEngine:
    """Evaluates coherences of one prepared state in one bath.

    Preparation weights, pruned weight sets and preparation columns are
    computed once and reused across time points. Instances are read-only
    after the first evaluation and may be shared between threads.
    """

    def __init__(self, bath: Bath, state: PreparedState, omega0: float):
        if not np.isfinite(omega0):
            raise DomainError(f"omega0 must be finite, got {omega0}")
        self.bath = bath
        self.state = state
        self.omega0 = float(omega0)
        self.spin = CollectiveSpin(state.N)
        self._weights: Optional[PreparationWeights] = None
        self._pruned: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._columns: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    @property
    def N(self) -> int:
        return self.state.N

    @property
    def is_unitary(self) -> bool:
        return self.state.kind is PreparationKind.UNITARY

    @property
    def weights(self) -> PreparationWeights:
        if self.is_unitary:
            raise DomainError("unitary preparations have element-dependent weights")
        if self._weights is None:
            self._weights = preparation_weights(self.state, self.bath, self.omega0)
        return self._weights

    def pruned_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """(twice_l, ln w_l) of the weights within e^-46 of the largest."""
        if self._pruned is None:
            if self.is_unitary:
                log_w = log_boltzmann_weights(self.N, self.bath.coupling_constant(), self.omega0, self.bath.beta)
            else:
                log_w = self.weights.log_p
            keep = log_w >= np.max(log_w) - PRUNE_LOG_RATIO
            twice_l = self.spin.twice_m_values[keep]
            self._pruned = (twice_l, log_w[keep])
            logger.debug(f"kept {keep.sum()} of {log_w.size} preparation weights")
        return self._pruned

    def _column(self, twice_l: int) -> Tuple[np.ndarray, np.ndarray]:
        if twice_l not in self._columns:
            self._columns[twice_l] = self.state.preparation.log_column(twice_l)
        return self._columns[twice_l]

    # correlation factors

    def correlation_factor(
        self, phi_value: float, twice_m: int, twice_n: int, mode: CorrelationMode
    ) -> CorrelationFactor:
        """F^c_{mn} for a given correlation-phase kernel value.

        ``phi_value`` is Phi(t) without pulses and -S with pulses. Unitary
        preparations always take the exact element-wise sum.
        """
        mode = CorrelationMode(mode)
        d = (self.spin.check(twice_n) - self.spin.check(twice_m)) / 2.0
        if mode is CorrelationMode.NONE or d == 0:
            return CorrelationFactor(1.0 + 0j, mode, 0 if mode is CorrelationMode.NONE else 1)
        if self.is_unitary:
            return self._unitary_factor(phi_value, twice_m, twice_n)
        if mode is CorrelationMode.LARGE_N:
            return CorrelationFactor(complex(np.exp(1j * self.N * d * phi_value)), mode, 1)
        twice_l, log_p = self.pruned_weights()
        value = np.sum(np.exp(log_p) * np.exp(-1j * twice_l * d * phi_value))
        return CorrelationFactor(complex(value), mode, int(twice_l.size))

    def _unitary_log_weights(self, twice_m: int, twice_n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """twice_l, ln|mu_l| and phase of mu_l = Omega_ml conj(Omega_nl) w_l."""
        twice_l, log_w = self.pruned_weights()
        i, j = self.spin.index(twice_m), self.spin.index(twice_n)
        log_mu = np.empty(twice_l.size)
        phase = np.empty(twice_l.size, dtype=complex)
        for k, tl in enumerate(twice_l):
            log_mod, ph = self._column(int(tl))
            log_mu[k] = log_mod[i] + log_mod[j] + log_w[k]
            phase[k] = ph[i] * np.conj(ph[j])
        return twice_l, log_mu, phase

    def _unitary_factor(self, phi_value: float, twice_m: int, twice_n: int) -> CorrelationFactor:
        d = (twice_n - twice_m) / 2.0
        twice_l, log_mu, phase = self._unitary_log_weights(twice_m, twice_n)
        shift, norm = _shifted_sum(log_mu, phase)
        if abs(norm) < DEGENERATE_BELOW:
            raise DegenerateStateError(f"preparation weights for element ({twice_m}, {twice_n}) cancel")
        _, rotated = _shifted_sum(log_mu, phase * np.exp(-1j * twice_l * d * phi_value))
        return CorrelationFactor(rotated / norm, CorrelationMode.EXACT, int(twice_l.size))

    def log_rho0(self, twice_m: int, twice_n: int) -> Tuple[float, complex]:
        """(ln|rho_S(0)_{mn}|, unit phase) for either preparation kind."""
        if not self.is_unitary:
            return self.state.log_rho0(twice_m, twice_n)
        _, log_mu, phase = self._unitary_log_weights(twice_m, twice_n)
        shift, reduced = _shifted_sum(log_mu, phase)
        if reduced == 0:
            return -np.inf, 1.0 + 0j
        return shift + float(np.log(abs(reduced))), reduced / abs(reduced)

    # elements

    def element_from_kernels(
        self,
        t: float,
        twice_m: int,
        twice_n: int,
        free_phase: float,
        B: float,
        D: float,
        phi_value: float,
        mode: CorrelationMode,
    ) -> DensityElement:
        """rho_S(t)_{mn} given the accumulated free phase (omega0 t) and kernel values."""
        mode = CorrelationMode(mode)
        m, n = self.spin.check(twice_m) / 2.0, self.spin.check(twice_n) / 2.0
        log_rho0, rho0_phase = self.log_rho0(twice_m, twice_n)
        modulus_log = -((m - n) ** 2) * B
        phase = -(m - n) * free_phase - D * (m * m - n * n)
        factor = self.correlation_factor(phi_value, twice_m, twice_n, mode)
        value = np.exp(log_rho0 + modulus_log) * rho0_phase * np.exp(1j * phase) * factor.value
        total_phase = phase + float(np.angle(factor.value)) if factor.value != 0 else phase
        return DensityElement(
            twice_m=twice_m,
            twice_n=twice_n,
            t=t,
            modulus_log=modulus_log,
            phase=total_phase,
            value=complex(value),
            correlation=None if mode is CorrelationMode.NONE else factor,
        )

    def element(self, t: float, twice_m: int, twice_n: int, mode: CorrelationMode) -> DensityElement:
        t = float(as_times(t)[0])
        return self.element_from_kernels(
            t,
            twice_m,
            twice_n,
            self.omega0 * t,
            float(self.bath.gamma_kernel(t)),
            float(self.bath.delta_kernel(t)),
            float(self.bath.phi(t)),
            mode,
        )

    def density_matrix_from_kernels(
        self, free_phase: float, B: float, D: float, phi_value: float, mode: CorrelationMode
    ) -> np.ndarray:
        """Dense rho_S(t); intended for small N."""
        mode = CorrelationMode(mode)
        tm = self.spin.twice_m_values
        m = tm / 2.0
        dm = m[:, None] - m[None, :]
        free = np.exp(-(dm ** 2) * B - 1j * dm * free_phase - 1j * D * (m[:, None] ** 2 - m[None, :] ** 2))
        if self.is_unitary:
            twice_l, log_w = self.pruned_weights()
            rho = np.zeros((tm.size, tm.size), dtype=complex)
            use_phi = 0.0 if mode is CorrelationMode.NONE else phi_value
            for tl, lw in zip(twice_l, log_w):
                log_mod, ph = self._column(int(tl))
                # e^{-i 2l(n-m)phi} splits into a row and a column factor
                col = np.exp(log_mod + 0.5 * lw) * ph * np.exp(1j * tl * m * use_phi)
                rho += np.outer(col, col.conj())
            return rho * free
        psi = self.state.amplitudes()
        rho0 = np.outer(psi, psi.conj())
        if mode is CorrelationMode.NONE:
            return rho0 * free
        if mode is CorrelationMode.LARGE_N:
            corr = np.exp(-1j * self.N * dm * phi_value)
        else:
            twice_l, log_p = self.pruned_weights()
            corr = np.einsum("l,lmn->mn", np.exp(log_p), np.exp(1j * twice_l[:, None, None] * dm[None] * phi_value))
        return rho0 * free * corr

    def density_matrix(self, t: float, mode: CorrelationMode) -> np.ndarray:
        t = float(as_times(t)[0])
        return self.density_matrix_from_kernels(
            self.omega0 * t,
            float(self.bath.gamma_kernel(t)),
            float(self.bath.delta_kernel(t)),
            float(self.bath.phi(t)),
            mode,
        )

    # j_x

    def x_sum(self, D: float) -> complex:
        """X = (2/N) sum_m c_m rho0_{m,m+1} e^{2imD} for a projective state."""
        if self.is_unitary:
            raise DomainError("X(t) is defined for projective states")
        N = self.N
        ls = self.state.log_amplitude_sq
        log_terms = _pair_log_coefficients(N) + 0.5 * (ls[:-1] + ls[1:])
        twice_m = self.spin.twice_m_values[:-1]
        phases = self.state.phases[:-1] * np.conj(self.state.phases[1:]) * np.exp(1j * twice_m * D)
        shift, reduced = _shifted_sum(log_terms, phases)
        return (2.0 / N) * np.exp(shift) * reduced

    def jx_from_kernels(self, free_phase: float, B: float, D: float, phi_value: float, mode: CorrelationMode) -> float:
        """j_x = e^{-B} Re[e^{i(free_phase + D)} X F]; unitary states sum element-wise."""
        mode = CorrelationMode(mode)
        if self.is_unitary:
            return self._unitary_jx(free_phase, B, D, phi_value, mode)
        X = self.x_sum(D)
        F = self.correlation_factor(phi_value, -self.N, -self.N + 2, mode).value
        return float(np.exp(-B) * np.real(np.exp(1j * (free_phase + D)) * X * F))

    def _unitary_jx(self, free_phase: float, B: float, D: float, phi_value: float, mode: CorrelationMode) -> float:
        N = self.N
        twice_l, log_w = self.pruned_weights()
        use_phi = 0.0 if mode is CorrelationMode.NONE else phi_value
        base = _pair_log_coefficients(N)
        twice_m = self.spin.twice_m_values[:-1]
        twist = np.exp(1j * D * (twice_m + 1))
        logs: List[np.ndarray] = []
        phases: List[np.ndarray] = []
        for tl, lw in zip(twice_l, log_w):
            log_mod, ph = self._column(int(tl))
            logs.append(base + log_mod[:-1] + log_mod[1:] + lw)
            phases.append(ph[:-1] * np.conj(ph[1:]) * twist * np.exp(-1j * tl * use_phi))
        shift, reduced = _shifted_sum(np.concatenate(logs), np.concatenate(phases))
        total = (2.0 / N) * np.exp(shift) * reduced
        return float(np.exp(-B) * np.real(np.exp(1j * free_phase) * total))

    def jx(self, t, mode: CorrelationMode):
        arr, scalar = as_times(t)
        B = np.atleast_1d(self.bath.gamma_kernel(arr))
        D = np.atleast_1d(self.bath.delta_kernel(arr))
        phi = np.atleast_1d(self.bath.phi(arr))
        flat = arr.ravel()
        out = np.array(
            [self.jx_from_kernels(self.omega0 * x, b, d, p, mode) for x, b, d, p in zip(flat, B.ravel(), D.ravel(), phi.ravel())]
        )
        return float(out[0]) if scalar else out.reshape(arr.shape)


# Module-level operations


def rho_element_factorized(
    t: float, twice_m: int, twice_n: int, bath: Bath, rho0_element: complex, omega0: float
) -> DensityElement:
    """rho0 e^{-i omega0 (m-n) t} e^{-i D (m^2 - n^2)} e^{-(m-n)^2 B}."""
    t = float(as_times(t)[0])
    m, n = twice_m / 2.0, twice_n / 2.0
    B = float(bath.gamma_kernel(t))
    D = float(bath.delta_kernel(t))
    modulus_log = -((m - n) ** 2) * B
    phase = -omega0 * (m - n) * t - D * (m * m - n * n)
    value = complex(rho0_element) * np.exp(modulus_log + 1j * phase)
    return DensityElement(twice_m, twice_n, t, modulus_log, phase, complex(value))


def correlation_factor_exact(
    t: float, twice_m: int, twice_n: int, weights: PreparationWeights, bath: Bath
) -> CorrelationFactor:
    """F^c = sum_l p_l e^{-i 2l (n-m) Phi(t)} over the weights within e^-46 of the largest."""
    phi_value = float(bath.phi(t))
    d = (twice_n - twice_m) / 2.0
    keep = weights.log_p >= np.max(weights.log_p) - PRUNE_LOG_RATIO
    twice_l = weights.twice_l[keep]
    value = np.sum(weights.p[keep] * np.exp(-1j * twice_l * d * phi_value))
    return CorrelationFactor(complex(value), CorrelationMode.EXACT, int(keep.sum()))


def correlation_factor_largeN(t: float, twice_m: int, twice_n: int, N: int, bath: Bath) -> CorrelationFactor:
    """e^{i N (n-m) Phi(t)}, the l = -N/2 term alone."""
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    phase = N * (twice_n - twice_m) / 2.0 * float(bath.phi(t))
    return CorrelationFactor(complex(np.exp(1j * phase)), CorrelationMode.LARGE_N, 1)


def rho_element_correlated(
    t: float,
    twice_m: int,
    twice_n: int,
    bath: Bath,
    state: PreparedState,
    omega0: float,
    mode: Union[CorrelationMode, str] = CorrelationMode.EXACT,
) -> DensityElement:
    return DephasingEngine(bath, state, omega0).element(t, twice_m, twice_n, mode)


def X_of_t(N: int, t, bath: Bath, state: Optional[PreparedState] = None):
    """X(t), the twisting sum entering j_x; defaults to the coherent state."""
    state = PreparedState.coherent(N) if state is None else state
    if state.N != N:
        raise DomainError(f"state has N = {state.N}, expected {N}")
    engine = DephasingEngine(bath, state, 0.0)
    arr, scalar = as_times(t)
    D = np.atleast_1d(bath.delta_kernel(arr)).ravel()
    out = np.array([engine.x_sum(float(d)) for d in D], dtype=complex)
    return complex(out[0]) if scalar else out.reshape(arr.shape)


def jx(
    t,
    N: int,
    bath: Bath,
    state: Optional[PreparedState] = None,
    correlation_mode: Union[CorrelationMode, str] = CorrelationMode.NONE,
    omega0: float = 0.0,
):
    """Scaled observable j_x = 2<J_x>/N."""
    state = PreparedState.coherent(N) if state is None else state
    if state.N != N:
        raise DomainError(f"state has N = {state.N}, expected {N}")
    return DephasingEngine(bath, state, omega0).jx(t, correlation_mode)


def correlation_timescale(N: int, bath: Bath) -> Optional[float]:
    """t_c = 1/(N C); None when the bath does not couple."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    C = bath.coupling_constant()
    if C == 0:
        return None
    return 1.0 / (N * C)


def reduced_density_matrix(
    t: float,
    bath: Bath,
    state: PreparedState,
    omega0: float,
    mode: Union[CorrelationMode, str] = CorrelationMode.EXACT,
) -> np.ndarray:
    """Closed-form rho_S(t) as a dense (N+1) x (N+1) matrix."""
    return DephasingEngine(bath, state, omega0).density_matrix(t, mode)
