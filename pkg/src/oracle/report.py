"""Comparison of closed-form and exactly evolved reduced density matrices."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from ..bath import Bath
from ..spin import PreparedState
from .evolution import FACTORIZED, discrete_closed_form, evolve_and_trace, prepare_initial
from .hamiltonian import DiscreteBathSpec, assemble_hamiltonian

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["m", "n", "t", "abs_closed_form", "abs_oracle", "deviation"]


@dataclass(frozen=True)
class OracleRow:
    twice_m: int
    twice_n: int
    t: float
    closed_abs: float
    oracle_abs: float
    deviation: float


@dataclass
class OracleReport:
    """Per-element deviations between the closed form and exact diagonalization."""

    label: str
    n_max: int
    rows: List[OracleRow] = field(default_factory=list)
    truncation_indicator: Optional[float] = None

    @property
    def max_deviation(self) -> float:
        return max((row.deviation for row in self.rows), default=0.0)

    @property
    def worst(self) -> Optional[OracleRow]:
        return max(self.rows, key=lambda row: row.deviation, default=None)

    def converged(self, tolerance: float) -> bool:
        """True when raising n_max by 10 moved the oracle by at most ``tolerance``."""
        return self.truncation_indicator is not None and self.truncation_indicator <= tolerance

    def to_frame(self) -> pd.DataFrame:
        data = [
            (row.twice_m / 2, row.twice_n / 2, row.t, row.closed_abs, row.oracle_abs, row.deviation) for row in self.rows
        ]
        return pd.DataFrame(data, columns=REPORT_COLUMNS)


def compare_matrices(
    label: str, times, twice_values, closed: np.ndarray, oracle: np.ndarray, n_max: int
) -> OracleReport:
    report = OracleReport(label, n_max)
    diff = np.abs(closed - oracle)
    for k, t in enumerate(np.atleast_1d(times)):
        for i, tm in enumerate(twice_values):
            for j, tn in enumerate(twice_values):
                report.rows.append(
                    OracleRow(
                        int(tm),
                        int(tn),
                        float(t),
                        float(abs(closed[k, i, j])),
                        float(abs(oracle[k, i, j])),
                        float(diff[k, i, j]),
                    )
                )
    return report


def oracle_density_matrices(
    N: int, spec: DiscreteBathSpec, omega0: float, beta: float, kind: str, times, state: Optional[PreparedState] = None
) -> np.ndarray:
    """Exact rho_S(t) on the given time grid."""
    hamiltonian = assemble_hamiltonian(N, spec, omega0)
    joint = prepare_initial(kind, hamiltonian, beta, state)
    return evolve_and_trace(joint, hamiltonian, times)


def default_state(N: int, kind: str) -> PreparedState:
    return PreparedState.rotated(N) if kind == "unitary" else PreparedState.coherent(N)


def run_oracle_case(
    label: str,
    N: int,
    spec: DiscreteBathSpec,
    omega0: float,
    beta: float,
    kind: str = FACTORIZED,
    times=None,
    state: Optional[PreparedState] = None,
    check_truncation: bool = False,
    bath: Optional[Bath] = None,
) -> OracleReport:
    """Compare closed form and exact evolution on ``times`` (20 points on [0, 10] by default)."""
    times = np.linspace(0.0, 10.0, 20) if times is None else np.atleast_1d(np.asarray(times, dtype=float))
    state = default_state(N, kind) if state is None else state
    oracle = oracle_density_matrices(N, spec, omega0, beta, kind, times, state)
    closed = discrete_closed_form(times, spec, omega0, beta, kind, state, bath=bath)
    twice_values = np.arange(-N, N + 1, 2)
    report = compare_matrices(label, times, twice_values, closed, oracle, spec.n_max)
    if check_truncation:
        finer = oracle_density_matrices(N, spec.with_n_max(spec.n_max + 10), omega0, beta, kind, times, state)
        report.truncation_indicator = float(np.max(np.abs(finer - oracle)))
    logger.info(f"oracle {label}: max deviation {report.max_deviation:.3e}")
    return report
