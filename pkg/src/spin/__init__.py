"""Collective-spin bookkeeping in the J_z basis.

States are indexed by ``twice_m`` in {-N, -N+2, ..., N} so half-integer m is
exact for odd N. Array position ``i = (twice_m + N) // 2`` runs from
m = -N/2 to m = N/2.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import gammaln, logsumexp

from ..errors import DegenerateStateError, DomainError
from ..models import PreparationKind
from ..special import log_binomial, log_binomial_array

logger = logging.getLogger(__name__)

LN2 = float(np.log(2.0))
UNITARY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class CollectiveSpin:
    """Maximal-spin multiplet of N two-level atoms."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"particle count must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def dimension(self) -> int:
        return self.N + 1

    @property
    def twice_m_values(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1, 2)

    def check(self, twice_m: int) -> int:
        twice_m = int(twice_m)
        if abs(twice_m) > self.N:
            raise DomainError(f"|twice_m| = {abs(twice_m)} exceeds N = {self.N}")
        if (twice_m - self.N) % 2:
            raise DomainError(f"twice_m = {twice_m} has the wrong parity for N = {self.N}")
        return twice_m

    def index(self, twice_m: int) -> int:
        return (self.check(twice_m) + self.N) // 2


def wigner_coherent_amplitude(N: int, twice_m: int) -> float:
    """ln <m| e^{-i pi/2 J_y} |N/2> = (1/2)[ln C(N, N/2 + m) - N ln 2]."""
    CollectiveSpin(N).check(twice_m)
    return 0.5 * (log_binomial(N, (N + twice_m) // 2) - N * LN2)


def coherent_log_amplitudes(N: int) -> np.ndarray:
    """Log-amplitudes of the x-polarized coherent state over all m."""
    k = np.arange(N + 1)
    return 0.5 * (log_binomial_array(N, k) - N * LN2)


def coherent_rho0_element(N: int, twice_m: int, twice_n: int) -> float:
    """[rho_S(0)]_{mn} of the coherent state, a product of two real amplitudes."""
    return float(np.exp(wigner_coherent_amplitude(N, twice_m) + wigner_coherent_amplitude(N, twice_n)))


def spin_operators(N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (J_z, J_+, J_y) on the N+1 dimensional multiplet."""
    spin = CollectiveSpin(N)
    m = spin.twice_m_values / 2.0
    j = N / 2.0
    jz = np.diag(m)
    raising = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(raising, k=-1)
    jy = (jp - jp.T) / 2j
    return jz, jp, jy


class UnitaryPreparation(ABC):
    """Accessor for the matrix elements <m|Omega|l> of a preparation unitary."""

    N: int

    @abstractmethod
    def log_column(self, twice_l: int) -> Tuple[np.ndarray, np.ndarray]:
        """(ln|Omega_ml|, unit phase of Omega_ml) over all m for one column l."""

    def element(self, twice_m: int, twice_l: int) -> complex:
        log_mod, phase = self.log_column(twice_l)
        i = CollectiveSpin(self.N).index(twice_m)
        return complex(np.exp(log_mod[i]) * phase[i])

    def materialize(self) -> np.ndarray:
        """Dense matrix, column by column."""
        spin = CollectiveSpin(self.N)
        out = np.empty((spin.dimension, spin.dimension), dtype=complex)
        for i, tl in enumerate(spin.twice_m_values):
            log_mod, phase = self.log_column(int(tl))
            out[:, i] = np.exp(log_mod) * phase
        return out

    def unitarity_residual(self) -> float:
        omega = self.materialize()
        return float(np.max(np.abs(omega.conj().T @ omega - np.eye(omega.shape[0]))))


class RotationPreparation(UnitaryPreparation):
    """Omega = exp(i pi/2 J_y), elements from the Wigner d formula in log space.

    Column l = -N/2 reproduces the coherent amplitudes exactly (single term).
    Columns deep inside the multiplet suffer the alternating-sum cancellation
    of the d formula; they are accurate for the small N the oracle uses.
    """

    def __init__(self, N: int):
        self.N = CollectiveSpin(N).N
        self._log_fact = gammaln(np.arange(self.N + 2) + 1.0)
        self._columns: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def log_column(self, twice_l: int) -> Tuple[np.ndarray, np.ndarray]:
        N = self.N
        twice_l = CollectiveSpin(N).check(twice_l)
        if twice_l in self._columns:
            return self._columns[twice_l]
        lf = self._log_fact
        a_l = (N + twice_l) // 2
        log_mod = np.full(N + 1, -np.inf)
        sign = np.ones(N + 1)
        for a_m in range(N + 1):
            s = np.arange(max(0, a_l - a_m), min(a_l, N - a_m) + 1)
            if s.size == 0:
                continue
            prefactor = 0.5 * (lf[a_m] + lf[N - a_m] + lf[a_l] + lf[N - a_l]) - 0.5 * N * LN2
            terms = -(lf[a_l - s] + lf[s] + lf[a_m - a_l + s] + lf[N - a_m - s])
            value, sgn = logsumexp(terms, b=(-1.0) ** s, return_sign=True)
            # exact cancellation: logsumexp gives -inf with a nan sign
            if not np.isfinite(value) or not np.isfinite(sgn) or sgn == 0:
                continue
            log_mod[a_m] = prefactor + value
            sign[a_m] = sgn
        phase = sign.astype(complex)
        # cached; callers share these arrays
        log_mod.setflags(write=False)
        phase.setflags(write=False)
        self._columns[twice_l] = (log_mod, phase)
        return log_mod, phase

    def dense_reference(self) -> np.ndarray:
        """exp(i pi/2 J_y) by matrix exponential, for cross-checks at small N."""
        _, _, jy = spin_operators(self.N)
        return linalg.expm(0.5j * np.pi * jy)


class MatrixPreparation(UnitaryPreparation):
    """Explicit preparation unitary given as a dense matrix."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 2:
            raise DomainError(f"preparation matrix must be square of size N+1 >= 2, got {matrix.shape}")
        self.N = matrix.shape[0] - 1
        self.matrix = matrix
        residual = self.unitarity_residual()
        if residual > UNITARY_TOLERANCE:
            raise DomainError(f"preparation matrix is not unitary (residual {residual:.2e})")

    def materialize(self) -> np.ndarray:
        return self.matrix

    def log_column(self, twice_l: int) -> Tuple[np.ndarray, np.ndarray]:
        col = self.matrix[:, CollectiveSpin(self.N).index(twice_l)]
        mod = np.abs(col)
        with np.errstate(divide="ignore"):
            log_mod = np.log(mod)
        phase = np.where(mod > 0, col / np.where(mod > 0, mod, 1.0), 1.0 + 0j)
        return log_mod, phase


@dataclass(frozen=True, eq=False)
class PreparedState:
    """System state before the correlated preparation.

    Projective states carry ln|<l|psi>|^2 and the phases of <l|psi>; unitary
    states carry the preparation accessor instead.
    """

    N: int
    kind: PreparationKind
    log_amplitude_sq: Optional[np.ndarray] = None
    phases: Optional[np.ndarray] = None
    preparation: Optional[UnitaryPreparation] = None
    label: str = field(default="custom")

    def __post_init__(self):
        spin = CollectiveSpin(self.N)
        kind = PreparationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PreparationKind.PROJECTIVE:
            if self.log_amplitude_sq is None:
                raise DomainError("projective state needs amplitudes")
            log_sq = np.asarray(self.log_amplitude_sq, dtype=float)
            if log_sq.shape != (spin.dimension,):
                raise DomainError(f"expected {spin.dimension} amplitudes, got {log_sq.shape}")
            norm = logsumexp(log_sq)
            if not np.isfinite(norm):
                raise DegenerateStateError("state has no nonzero amplitude")
            phases = np.ones(spin.dimension, dtype=complex) if self.phases is None else np.asarray(self.phases, dtype=complex)
            object.__setattr__(self, "log_amplitude_sq", log_sq - norm)
            object.__setattr__(self, "phases", phases)
        elif self.preparation is None:
            raise DomainError("unitary state needs a preparation operator")
        elif self.preparation.N != self.N:
            raise DomainError(f"preparation acts on N = {self.preparation.N}, state has N = {self.N}")

    @classmethod
    def coherent(cls, N: int) -> "PreparedState":
        """x-polarized coherent state e^{-i pi/2 J_y}|N/2>."""
        return cls(N, PreparationKind.PROJECTIVE, 2.0 * coherent_log_amplitudes(N), label="coherent")

    @classmethod
    def rotated(cls, N: int) -> "PreparedState":
        """Unitary preparation Omega = e^{i pi/2 J_y} applied to the thermal state."""
        return cls(N, PreparationKind.UNITARY, preparation=RotationPreparation(N), label="rotation")

    @classmethod
    def from_amplitudes(cls, amplitudes, label: str = "custom") -> "PreparedState":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size < 2:
            raise DomainError("amplitudes must be a vector of length N+1 >= 2")
        mod = np.abs(amplitudes)
        if not np.any(mod > 0):
            raise DegenerateStateError("all amplitudes are zero")
        with np.errstate(divide="ignore"):
            log_sq = 2.0 * np.log(mod)
        phases = np.where(mod > 0, amplitudes / np.where(mod > 0, mod, 1.0), 1.0 + 0j)
        return cls(amplitudes.size - 1, PreparationKind.PROJECTIVE, log_sq, phases, label=label)

    @classmethod
    def from_file(cls, path: Union[str, Path], N: Optional[int] = None) -> "PreparedState":
        """Read lines of ``twice_l re im``; absent l have zero amplitude."""
        path = Path(path)
        if not path.exists():
            raise DomainError(f"amplitude file not found: {path}")
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 3:
            raise DomainError(f"{path}: expected three columns (twice_l, re, im), found {data.shape[1]}")
        twice_l = data[:, 0].astype(int)
        if np.any(twice_l != data[:, 0]):
            raise DomainError(f"{path}: twice_l must be an integer")
        N = int(np.max(np.abs(twice_l))) if N is None else N
        spin = CollectiveSpin(N)
        amplitudes = np.zeros(spin.dimension, dtype=complex)
        for tl, re, im in zip(twice_l, data[:, 1], data[:, 2]):
            amplitudes[spin.index(int(tl))] += complex(re, im)
        logger.info(f"Loaded {len(twice_l)} amplitudes for N={N} from {path}")
        return cls.from_amplitudes(amplitudes, label=path.name)

    @property
    def spin(self) -> CollectiveSpin:
        return CollectiveSpin(self.N)

    def amplitudes(self) -> np.ndarray:
        """<l|psi> for projective states (may underflow at large N)."""
        if self.kind is not PreparationKind.PROJECTIVE:
            raise DomainError("amplitudes are defined for projective states only")
        return np.exp(0.5 * self.log_amplitude_sq) * self.phases

    def log_rho0(self, twice_m: int, twice_n: int) -> Tuple[float, complex]:
        """(ln|rho_S(0)_{mn}|, unit phase) of the projected system state."""
        i, j = self.spin.index(twice_m), self.spin.index(twice_n)
        log_mod = 0.5 * (self.log_amplitude_sq[i] + self.log_amplitude_sq[j])
        return float(log_mod), complex(self.phases[i] * np.conj(self.phases[j]))


@dataclass(frozen=True, eq=False)
class PreparationWeights:
    """Normalized probabilities p_l of the displaced thermal components."""

    N: int
    beta: float
    omega0: float
    C: float
    log_p: np.ndarray
    p: np.ndarray

    @property
    def twice_l(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1, 2)

    @property
    def dominant(self) -> int:
        """twice_l of the largest weight."""
        return int(self.twice_l[int(np.argmax(self.log_p))])

    @property
    def p_max(self) -> float:
        return float(np.max(self.p))


def boltzmann_exponent(N: int, C: float, omega0: float) -> np.ndarray:
    """-omega0 l + C l^2 over all l; multiplying by beta gives ln of the displaced-mode Boltzmann factor."""
    l = np.arange(-N, N + 1, 2) / 2.0
    return -omega0 * l + C * l * l


def log_boltzmann_weights(N: int, C: float, omega0: float, beta: float, log_amplitude_sq=None) -> np.ndarray:
    """Normalized ln weights ln|psi_l|^2 + beta(-omega0 l + C l^2); beta = inf keeps only the maximizers."""
    exponent = boltzmann_exponent(N, C, omega0)
    base = np.zeros(N + 1) if log_amplitude_sq is None else np.asarray(log_amplitude_sq, dtype=float)
    support = np.isfinite(base)
    if not np.any(support):
        raise DegenerateStateError("state has no nonzero amplitude")
    if np.isinf(beta):
        top = np.max(exponent[support])
        scale = max(1.0, abs(top))
        keep = support & (exponent >= top - 1e-12 * scale)
        log_w = np.where(keep, base, -np.inf)
    else:
        log_w = base + beta * exponent
    return log_w - logsumexp(log_w)


def preparation_weights(
    state: PreparedState, bath, omega0: float, beta: Optional[float] = None
) -> PreparationWeights:
    """p_l = |<l|psi>|^2 e^{-beta omega0 l + beta C l^2} / norm, computed in log space.

    ``beta`` overrides the bath temperature (0 is allowed and returns |psi_l|^2).
    """
    if state.kind is not PreparationKind.PROJECTIVE:
        raise DomainError("preparation weights are defined for projective states; unitary states use element weights")
    beta = bath.beta if beta is None else float(beta)
    if beta < 0 or np.isnan(beta):
        raise DomainError(f"beta must be nonnegative, got {beta}")
    C = bath.coupling_constant()
    log_p = log_boltzmann_weights(state.N, C, omega0, beta, state.log_amplitude_sq)
    p = np.exp(log_p)
    logger.debug(f"preparation weights N={state.N}: p_max={p.max():.3e} at index {int(np.argmax(p))}")
    return PreparationWeights(state.N, beta, omega0, C, log_p, p)
