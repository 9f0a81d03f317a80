"""Constrained binary optimization with commuting-driver QAOA on a statevector simulator."""
from __future__ import annotations

from .problem import ConstraintSystem, Objective, Problem, check_feasible, find_feasible, p0_problem
from .nullspace import BasisNotFound, ConstraintBasis, solve_basis
from .solvers import OracleResult, RunReport, SolverSpec, brute_force_oracle, compute_metrics, solve

__all__ = [
    "BasisNotFound",
    "ConstraintBasis",
    "ConstraintSystem",
    "Objective",
    "OracleResult",
    "Problem",
    "RunReport",
    "SolverSpec",
    "brute_force_oracle",
    "check_feasible",
    "compute_metrics",
    "find_feasible",
    "p0_problem",
    "solve",
    "solve_basis",
]

__version__ = "0.1.0"
