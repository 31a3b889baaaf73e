"""Spin plus truncated-Fock Hamiltonian, assembled block by block in J_z."""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg, sparse

from ..bath import DiscreteBath
from ..errors import DomainError, SizeError
from ..spin import CollectiveSpin

logger = logging.getLogger(__name__)

DIMENSION_BUDGET = 200_000


@dataclass(frozen=True)
class DiscreteBathSpec:
    """Bath modes (omega_k, g_k) with a common Fock cutoff n_max per mode."""

    modes: Tuple[Tuple[float, complex], ...]
    n_max: int = 40

    def __post_init__(self):
        modes = tuple((float(w), complex(g)) for w, g in self.modes)
        if not modes:
            raise DomainError("oracle bath needs at least one mode")
        if any(w <= 0 for w, _ in modes):
            raise DomainError("mode frequencies must be positive")
        if int(self.n_max) < 2:
            raise DomainError(f"Fock cutoff must be at least 2, got {self.n_max}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def bath_dimension(self) -> int:
        return self.n_max ** self.n_modes

    def bath(self, beta: float) -> DiscreteBath:
        """The same modes as a closed-form kernel source."""
        return DiscreteBath(self.modes, beta)

    def with_n_max(self, n_max: int) -> "DiscreteBathSpec":
        return DiscreteBathSpec(self.modes, n_max)


def _mode_operators(spec: DiscreteBathSpec) -> Tuple[List[sparse.csr_matrix], List[sparse.csr_matrix]]:
    """Number and annihilation operators of every mode on the product Fock space."""
    n = spec.n_max
    ident = sparse.identity(n, format="csr")
    number = sparse.diags(np.arange(n, dtype=float), format="csr")
    lower = sparse.diags(np.sqrt(np.arange(1, n, dtype=float)), offsets=1, format="csr")
    numbers, lowers = [], []
    for k in range(spec.n_modes):
        factors_n = [number if i == k else ident for i in range(spec.n_modes)]
        factors_a = [lower if i == k else ident for i in range(spec.n_modes)]
        numbers.append(reduce(lambda x, y: sparse.kron(x, y, format="csr"), factors_n))
        lowers.append(reduce(lambda x, y: sparse.kron(x, y, format="csr"), factors_a))
    return numbers, lowers


class BlockHamiltonian:
    """H = omega0 J_z + sum_k omega_k b_k^dag b_k + 2 J_z sum_k (g_k* b_k + g_k b_k^dag).

    J_z is conserved, so H is stored as one bath-space block per m:
    H_m = omega0 m + H_B + 2m V.
    """

    def __init__(self, N: int, spec: DiscreteBathSpec, omega0: float):
        self.spin = CollectiveSpin(N)
        self.spec = spec
        self.omega0 = float(omega0)
        numbers, lowers = _mode_operators(spec)
        self.bath_hamiltonian = sum(w * num for (w, _), num in zip(spec.modes, numbers))
        self.coupling = sum(np.conj(g) * a + g * a.conj().T for (_, g), a in zip(spec.modes, lowers))
        self._eigen: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    @property
    def N(self) -> int:
        return self.spin.N

    @property
    def bath_dimension(self) -> int:
        return self.spec.bath_dimension

    @property
    def dimension(self) -> int:
        return self.spin.dimension * self.bath_dimension

    def block(self, twice_m: int) -> sparse.csr_matrix:
        m = self.spin.check(twice_m) / 2.0
        ident = sparse.identity(self.bath_dimension, format="csr")
        return (self.omega0 * m * ident + self.bath_hamiltonian + 2.0 * m * self.coupling).tocsr()

    def full(self) -> sparse.csr_matrix:
        """Whole Hamiltonian on |m> (x) |n_1 ... n_K>, m ascending."""
        return sparse.block_diag([self.block(int(tm)) for tm in self.spin.twice_m_values], format="csr")

    def hermiticity_residual(self) -> float:
        h = self.full()
        diff = abs(h - h.conj().T)
        return float(diff.max()) if diff.nnz else 0.0

    def eigensystem(self, twice_m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors of H_m, cached."""
        if twice_m not in self._eigen:
            energies, vectors = linalg.eigh(self.block(twice_m).toarray())
            self._eigen[twice_m] = (energies, vectors)
            logger.debug(f"diagonalized block m={twice_m / 2:g} of size {energies.size}")
        return self._eigen[twice_m]

    def free_energies(self) -> np.ndarray:
        """Diagonal of H_B in the Fock product basis."""
        return np.asarray(self.bath_hamiltonian.diagonal()).real


def assemble_hamiltonian(
    N: int, spec: DiscreteBathSpec, omega0: float, budget: int = DIMENSION_BUDGET
) -> BlockHamiltonian:
    """Build the block Hamiltonian.

    Raises:
        SizeError: if (N+1) * n_max^K exceeds ``budget``.
    """
    dimension = (N + 1) * spec.bath_dimension
    if dimension > budget:
        raise SizeError(dimension, budget)
    logger.info(f"Assembling oracle Hamiltonian: N={N}, {spec.n_modes} modes, n_max={spec.n_max}, dim={dimension}")
    return BlockHamiltonian(N, spec, omega0)
