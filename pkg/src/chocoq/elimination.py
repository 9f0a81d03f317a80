"""Variable elimination: fix a few variables classically, solve smaller instances.

Fixing ``x_j`` turns each row ``sum_i c_i x_i = c`` into ``sum_{i != j} c_i x_i = c - c_j x_j``.
Variables are picked greedily by how many nonzeros their column carries across the
current null-space basis, since the driver depth grows with that total.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from itertools import product
from typing import Mapping, Sequence

from .nullspace import ConstraintBasis, solve_basis
from .problem import ConstraintSystem, InfeasibleConstraint, Objective, Problem


@dataclass(frozen=True)
class SubInstance:
    assignment: Mapping[int, int]  # original index -> fixed bit
    problem: Problem | None  # None when the fixed bits already violate a row
    kept: tuple[int, ...]  # original index of each reduced variable


@dataclass(frozen=True)
class EliminationPlan:
    eliminated_vars: tuple[int, ...]
    sub_instances: tuple[SubInstance, ...]
    bases: tuple[ConstraintBasis, ...]  # basis before the first pick, then after each pick


def reduce_problem(p: Problem, fixed: Mapping[int, int]) -> tuple[Problem | None, tuple[int, ...]]:
    """Substitute ``fixed`` into ``p`` and renumber the remaining variables."""
    kept = tuple(i for i in range(p.num_vars) if i not in fixed)
    if not kept:
        raise ValueError("cannot eliminate every variable")
    new_index = {old: new for new, old in enumerate(kept)}
    obj = p.objective
    constant = obj.constant
    linear: dict[int, Decimal] = {}
    for i, c in obj.linear.items():
        if i in fixed:
            constant += c * fixed[i]
        else:
            linear[new_index[i]] = linear.get(new_index[i], Decimal(0)) + c
    quadratic: dict[tuple[int, int], Decimal] = {}
    for (i, j), c in obj.quadratic.items():
        if i in fixed and j in fixed:
            constant += c * fixed[i] * fixed[j]
        elif i in fixed or j in fixed:
            f, free = (i, j) if i in fixed else (j, i)
            if fixed[f]:
                k = new_index[free]
                linear[k] = linear.get(k, Decimal(0)) + c
        else:
            quadratic[(new_index[i], new_index[j])] = c
    rows = []
    for coeffs, rhs in p.constraints.rows:
        rhs -= sum(coeffs[j] * b for j, b in fixed.items())
        rows.append((tuple(coeffs[i] for i in kept), rhs))
    try:
        cs = ConstraintSystem(tuple(rows))
    except InfeasibleConstraint:
        return None, kept
    reduced = Problem(
        num_vars=len(kept),
        objective=Objective(obj.direction, constant, linear, quadratic),
        constraints=cs,
        var_names=tuple(p.var_names[i] for i in kept),
    )
    return reduced, kept


def _basis_of(cs_matrix: Sequence[Sequence[int]], n: int) -> ConstraintBasis:
    rows = tuple((tuple(r), 0) for r in cs_matrix)
    return solve_basis(ConstraintSystem(rows), n)


def build_elimination_plan(p: Problem, basis: ConstraintBasis, k: int) -> EliminationPlan:
    if not 1 <= k < p.num_vars:
        raise ValueError(f"k must be in [1, {p.num_vars - 1}], got {k}")
    matrix = p.constraints.matrix
    remaining = list(range(p.num_vars))
    current = basis
    bases = [basis]
    picked: list[int] = []
    for _ in range(k):
        counts = current.column_counts()
        # max() keeps the first maximum, i.e. the lowest original index on ties
        best = max(range(len(remaining)), key=lambda c: counts[c])
        picked.append(remaining.pop(best))
        sub = [[row[i] for i in remaining] for row in matrix]
        current = _basis_of(sub, len(remaining))
        bases.append(current)

    subs = []
    for bits in product((0, 1), repeat=k):
        fixed = dict(zip(picked, bits))
        reduced, kept = reduce_problem(p, fixed)
        subs.append(SubInstance(fixed, reduced, kept))
    return EliminationPlan(tuple(picked), tuple(subs), tuple(bases))


def merge_assignment(sub: SubInstance, y: Sequence[int], n: int) -> tuple[int, ...]:
    x = [0] * n
    for i, b in sub.assignment.items():
        x[i] = b
    for i, b in zip(sub.kept, y):
        x[i] = b
    return tuple(x)
