"""Exact-diagonalization oracle for few modes and small N, plus the validation suite."""

from .evolution import (
    FACTORIZED,
    PREPARATION_KINDS,
    JointState,
    discrete_closed_form,
    discrete_closed_form_element,
    evolve_and_trace,
    prepare_initial,
)
from .hamiltonian import DIMENSION_BUDGET, BlockHamiltonian, DiscreteBathSpec, assemble_hamiltonian
from .report import OracleReport, OracleRow, oracle_density_matrices, run_oracle_case
from .validation import CheckResult, PhiSignedBath, ValidationSuite, run_validation

__all__ = [
    "BlockHamiltonian",
    "CheckResult",
    "DIMENSION_BUDGET",
    "DiscreteBathSpec",
    "FACTORIZED",
    "JointState",
    "OracleReport",
    "OracleRow",
    "PREPARATION_KINDS",
    "PhiSignedBath",
    "ValidationSuite",
    "assemble_hamiltonian",
    "discrete_closed_form",
    "discrete_closed_form_element",
    "evolve_and_trace",
    "oracle_density_matrices",
    "prepare_initial",
    "run_oracle_case",
    "run_validation",
]
