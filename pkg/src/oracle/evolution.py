"""Joint initial states, exact evolution and the partial trace over the bath."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from scipy.special import logsumexp

from ..dynamics import DephasingEngine
from ..errors import DegenerateStateError, DomainError
from ..models import CorrelationMode, PreparationKind
from ..spin import PreparedState
from .hamiltonian import BlockHamiltonian, DiscreteBathSpec

logger = logging.getLogger(__name__)

# Boltzmann weights below this fraction of the largest are dropped.
THERMAL_CUTOFF = 1e-16

FACTORIZED = "factorized"
PREPARATION_KINDS = (FACTORIZED, str(PreparationKind.PROJECTIVE), str(PreparationKind.UNITARY))


@dataclass
class StateTerm:
    """One product term sigma (x) W diag(w) W^dag of the joint state."""

    system: np.ndarray
    vectors: np.ndarray
    log_weights: np.ndarray


@dataclass
class JointState:
    """rho(0) = sum_r sigma_r (x) R_r / Z with low-rank bath operators R_r."""

    N: int
    bath_dimension: int
    terms: List[StateTerm]
    log_norm: float

    def weights(self, term: StateTerm) -> np.ndarray:
        return np.exp(term.log_weights - self.log_norm)

    def trace(self) -> float:
        return float(sum(np.trace(term.system).real * self.weights(term).sum() for term in self.terms))

    def reduced(self) -> np.ndarray:
        """Partial trace over the bath at t = 0."""
        return sum(term.system * self.weights(term).sum() for term in self.terms)

    def bath_populations(self) -> np.ndarray:
        """Diagonal of Tr_S rho(0) in the Fock product basis."""
        pops = np.zeros(self.bath_dimension)
        for term in self.terms:
            pops += np.trace(term.system).real * (np.abs(term.vectors) ** 2 @ self.weights(term))
        return pops


def _psi_vector(state: Union[PreparedState, np.ndarray], N: int) -> np.ndarray:
    if isinstance(state, PreparedState):
        if state.kind is not PreparationKind.PROJECTIVE:
            raise DomainError("expected a projective state vector")
        psi = state.amplitudes()
    else:
        psi = np.asarray(state, dtype=complex)
    if psi.shape != (N + 1,):
        raise DomainError(f"state vector must have {N + 1} entries, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DegenerateStateError("state vector is zero")
    return psi / norm


def prepare_initial(
    kind: str,
    hamiltonian: BlockHamiltonian,
    beta: float,
    state: Optional[Union[PreparedState, np.ndarray]] = None,
) -> JointState:
    """Build the joint initial state.

    ``factorized``: |psi><psi| (x) e^{-beta H_B}/Z_B.
    ``projective``: |psi><psi| (x) <psi|e^{-beta H}|psi>/Z.
    ``unitary``: Omega e^{-beta H} Omega^dag / Z with Omega from a unitary PreparedState.
    """
    if kind not in PREPARATION_KINDS:
        raise DomainError(f"unknown preparation {kind!r}; expected one of {PREPARATION_KINDS}")
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0:
        raise DomainError(f"oracle preparation needs finite positive beta, got {beta}")
    N = hamiltonian.N
    twice = hamiltonian.spin.twice_m_values
    terms: List[StateTerm] = []

    if kind == FACTORIZED:
        psi = _psi_vector(state if state is not None else PreparedState.coherent(N), N)
        energies = hamiltonian.free_energies()
        log_w = -beta * energies
        keep = np.flatnonzero(log_w >= log_w.max() + np.log(THERMAL_CUTOFF))
        vectors = np.zeros((hamiltonian.bath_dimension, keep.size))
        vectors[keep, np.arange(keep.size)] = 1.0
        terms.append(StateTerm(np.outer(psi, psi.conj()), vectors, log_w[keep]))
    elif kind == str(PreparationKind.PROJECTIVE):
        psi = _psi_vector(state if state is not None else PreparedState.coherent(N), N)
        blocks, logs = [], []
        for i, tl in enumerate(twice):
            if abs(psi[i]) == 0:
                continue
            energies, vectors = hamiltonian.eigensystem(int(tl))
            blocks.append(vectors)
            logs.append(2.0 * np.log(abs(psi[i])) - beta * energies)
        top = max(lw.max() for lw in logs)
        kept_v, kept_w = [], []
        for vectors, lw in zip(blocks, logs):
            keep = lw >= top + np.log(THERMAL_CUTOFF)
            kept_v.append(vectors[:, keep])
            kept_w.append(lw[keep])
        terms.append(StateTerm(np.outer(psi, psi.conj()), np.hstack(kept_v), np.concatenate(kept_w)))
    else:
        prepared = state if state is not None else PreparedState.rotated(N)
        if not isinstance(prepared, PreparedState) or prepared.kind is not PreparationKind.UNITARY:
            raise DomainError("unitary preparation needs a unitary PreparedState")
        omega = prepared.preparation.materialize()
        spectra = [hamiltonian.eigensystem(int(tl)) for tl in twice]
        top = max(-beta * energies.min() for energies, _ in spectra)
        for i, (energies, vectors) in enumerate(spectra):
            lw = -beta * energies
            keep = lw >= top + np.log(THERMAL_CUTOFF)
            if not np.any(keep):
                continue
            column = omega[:, i]
            terms.append(StateTerm(np.outer(column, column.conj()), vectors[:, keep], lw[keep]))

    log_norm = logsumexp(np.concatenate([term.log_weights + np.log(np.trace(term.system).real) for term in terms]))
    joint = JointState(N, hamiltonian.bath_dimension, terms, float(log_norm))
    rank = sum(term.log_weights.size for term in terms)
    logger.debug(f"prepared {kind} state with {len(terms)} terms, total bath rank {rank}")
    return joint


def evolve_and_trace(joint: JointState, hamiltonian: BlockHamiltonian, times) -> np.ndarray:
    """rho_S(t) = Tr_B[U(t) rho(0) U(t)^dag] for every time; shape (T, N+1, N+1).

    With H_m = V_m E_m V_m^dag, each element is u_n^T (M o A^T) v_m where
    M = V_n^dag V_m, A = V_m^dag R V_n, u = e^{i E_n t} and v = e^{-i E_m t}.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise DomainError("evolution times must be nonnegative")
    twice = hamiltonian.spin.twice_m_values
    dim = twice.size
    out = np.zeros((times.size, dim, dim), dtype=complex)
    for i in range(dim):
        E_m, V_m = hamiltonian.eigensystem(int(twice[i]))
        v = np.exp(-1j * np.outer(E_m, times))
        for j in range(i, dim):
            sigma = [term.system[i, j] for term in joint.terms]
            if all(s == 0 for s in sigma):
                continue
            E_n, V_n = hamiltonian.eigensystem(int(twice[j]))
            A = np.zeros((E_m.size, E_n.size), dtype=complex)
            for s, term in zip(sigma, joint.terms):
                if s == 0:
                    continue
                left = V_m.conj().T @ term.vectors
                right = V_n.conj().T @ term.vectors
                A += s * (left * joint.weights(term)) @ right.conj().T
            K = (V_n.conj().T @ V_m) * A.T
            u = np.exp(1j * np.outer(E_n, times))
            values = np.sum(u * (K @ v), axis=0)
            out[:, i, j] = values
            if j != i:
                out[:, j, i] = np.conj(values)
    return out


def discrete_closed_form(
    times,
    spec: DiscreteBathSpec,
    omega0: float,
    beta: float,
    kind: str = FACTORIZED,
    state: Optional[PreparedState] = None,
    bath=None,
) -> np.ndarray:
    """Closed-form rho_S(t) with the kernels as finite sums over ``spec.modes``; shape (T, N+1, N+1).

    ``bath`` overrides the kernel source built from ``spec`` (used by mutation checks).
    """
    if kind not in PREPARATION_KINDS:
        raise DomainError(f"unknown preparation {kind!r}; expected one of {PREPARATION_KINDS}")
    bath = spec.bath(beta) if bath is None else bath
    if state is None:
        raise DomainError("closed form needs the prepared state")
    mode = CorrelationMode.NONE if kind == FACTORIZED else CorrelationMode.EXACT
    engine = DephasingEngine(bath, state, omega0)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return np.stack([engine.density_matrix(float(t), mode) for t in times])


def discrete_closed_form_element(
    t: float,
    twice_m: int,
    twice_n: int,
    spec: DiscreteBathSpec,
    omega0: float,
    beta: float,
    kind: str = FACTORIZED,
    state: Optional[PreparedState] = None,
) -> complex:
    """Single element of :func:`discrete_closed_form`."""
    if state is None:
        raise DomainError("closed form needs the prepared state")
    mode = CorrelationMode.NONE if kind == FACTORIZED else CorrelationMode.EXACT
    engine = DephasingEngine(spec.bath(beta), state, omega0)
    return engine.element(t, twice_m, twice_n, mode).value
