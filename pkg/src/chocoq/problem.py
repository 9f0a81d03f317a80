"""Constrained binary optimization problems: data model, evaluation, feasibility.

A problem is ``min/max f(x)`` over ``x in {0,1}^n`` subject to ``Cx = c`` with an
integer constraint matrix.  Objective coefficients are kept as ``Decimal`` so that
evaluation is exact for decimal inputs; constraint arithmetic is plain ``int``.

Bitstrings are written ``x1 x2 ... xn`` left to right, and variable ``i`` (0-based)
is the ``i``-th character.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterator, Mapping, Sequence

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

DEFAULT_FEASIBLE_BUDGET = 10**7


class InfeasibleConstraint(ValueError):
    """A constraint row with all-zero coefficients and nonzero right-hand side."""


class FeasibleNotFound(RuntimeError):
    """No feasible assignment exists, or the search budget ran out first."""


def to_decimal(value) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    # floats go through repr so 0.1 stays 0.1 rather than its binary expansion
    return Decimal(repr(value) if isinstance(value, float) else str(value))


@dataclass(frozen=True)
class Objective:
    direction: str = MINIMIZE
    constant: Decimal = Decimal(0)
    linear: Mapping[int, Decimal] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], Decimal] = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"unknown direction {self.direction!r}")
        object.__setattr__(self, "constant", to_decimal(self.constant))
        lin: dict[int, Decimal] = {}
        for i, c in self.linear.items():
            lin[int(i)] = lin.get(int(i), Decimal(0)) + to_decimal(c)
        quad: dict[tuple[int, int], Decimal] = {}
        for (i, j), c in self.quadratic.items():
            i, j = int(i), int(j)
            if i == j:
                # x_i^2 == x_i on binaries
                lin[i] = lin.get(i, Decimal(0)) + to_decimal(c)
                continue
            key = (i, j) if i < j else (j, i)
            quad[key] = quad.get(key, Decimal(0)) + to_decimal(c)
        object.__setattr__(self, "linear", {k: v for k, v in sorted(lin.items()) if v != 0})
        object.__setattr__(self, "quadratic", {k: v for k, v in sorted(quad.items()) if v != 0})

    @property
    def sign(self) -> int:
        """+1 for minimize, -1 for maximize: multiply to get minimize orientation."""
        return 1 if self.direction == MINIMIZE else -1

    def max_index(self) -> int:
        idx = list(self.linear) + [j for pair in self.quadratic for j in pair]
        return max(idx) if idx else -1


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows ``(coeffs, rhs)`` of ``Cx = c``; zero rows are dropped or rejected."""

    rows: tuple[tuple[tuple[int, ...], int], ...] = ()

    def __post_init__(self):
        cleaned = []
        for coeffs, rhs in self.rows:
            coeffs = tuple(int(c) for c in coeffs)
            rhs = int(rhs)
            if not any(coeffs):
                if rhs != 0:
                    raise InfeasibleConstraint(f"0 = {rhs} is never satisfied")
                continue
            cleaned.append((coeffs, rhs))
        object.__setattr__(self, "rows", tuple(cleaned))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> ConstraintSystem:
        if len(matrix) != len(rhs):
            raise ValueError("matrix and rhs have different row counts")
        return cls(tuple((tuple(r), b) for r, b in zip(matrix, rhs)))

    @property
    def matrix(self) -> list[list[int]]:
        return [list(c) for c, _ in self.rows]

    @property
    def rhs(self) -> list[int]:
        return [b for _, b in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Problem:
    num_vars: int
    objective: Objective
    constraints: ConstraintSystem = field(default_factory=ConstraintSystem)
    var_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        names = tuple(self.var_names) or tuple(f"x{i + 1}" for i in range(self.num_vars))
        if len(names) != self.num_vars:
            raise ValueError("var_names length does not match num_vars")
        object.__setattr__(self, "var_names", names)
        if self.objective.max_index() >= self.num_vars:
            raise ValueError("objective references a variable out of range")
        for coeffs, _ in self.constraints.rows:
            if len(coeffs) != self.num_vars:
                raise ValueError("constraint row length does not match num_vars")

    @property
    def direction(self) -> str:
        return self.objective.direction


def _check_len(p: Problem, x: Sequence[int]) -> None:
    if len(x) != p.num_vars:
        raise ValueError(f"expected {p.num_vars} bits, got {len(x)}")


def evaluate_objective(p: Problem, x: Sequence[int]) -> Decimal:
    """Objective value at ``x`` in the problem's own direction."""
    _check_len(p, x)
    obj = p.objective
    total = obj.constant
    for i, c in obj.linear.items():
        if x[i]:
            total += c
    for (i, j), c in obj.quadratic.items():
        if x[i] and x[j]:
            total += c
    return total


def residuals(p: Problem, x: Sequence[int]) -> list[int]:
    _check_len(p, x)
    return [sum(c * b for c, b in zip(coeffs, x)) - rhs for coeffs, rhs in p.constraints.rows]


def check_feasible(p: Problem, x: Sequence[int]) -> bool:
    return not any(residuals(p, x))


def bits_to_str(x: Sequence[int]) -> str:
    return "".join("1" if b else "0" for b in x)


def str_to_bits(s: str) -> tuple[int, ...]:
    return tuple(int(ch) for ch in s)


def iter_feasible(p: Problem, budget: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield feasible assignments in lexicographic order (0 before 1 per variable).

    Depth-first over variables in index order; a branch is cut as soon as some row's
    partial sum can no longer reach its right-hand side with the remaining variables.
    ``budget`` bounds visited nodes; exhausting it raises ``FeasibleNotFound``.
    """
    n = p.num_vars
    rows = p.constraints.rows
    # remaining attainable range of each row after variables [0, i) are fixed
    lo = [[0] * (n + 1) for _ in rows]
    hi = [[0] * (n + 1) for _ in rows]
    for r, (coeffs, _) in enumerate(rows):
        for i in range(n - 1, -1, -1):
            lo[r][i] = lo[r][i + 1] + min(0, coeffs[i])
            hi[r][i] = hi[r][i + 1] + max(0, coeffs[i])
    partial = [0] * len(rows)
    x = [0] * n
    nodes = 0

    def viable(i: int) -> bool:
        for r, (_, rhs) in enumerate(rows):
            need = rhs - partial[r]
            if need < lo[r][i] or need > hi[r][i]:
                return False
        return True

    def dfs(i: int):
        nonlocal nodes
        if i == n:
            yield tuple(x)
            return
        for bit in (0, 1):
            nodes += 1
            if budget is not None and nodes > budget:
                raise FeasibleNotFound(f"search budget of {budget} nodes exhausted")
            x[i] = bit
            if bit:
                for r, (coeffs, _) in enumerate(rows):
                    partial[r] += coeffs[i]
            if viable(i + 1):
                yield from dfs(i + 1)
            if bit:
                for r, (coeffs, _) in enumerate(rows):
                    partial[r] -= coeffs[i]
        x[i] = 0

    if viable(0):
        yield from dfs(0)


def find_feasible(p: Problem, budget: int = DEFAULT_FEASIBLE_BUDGET) -> tuple[int, ...]:
    """First feasible assignment in lexicographic order."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    for x in iter_feasible(p, budget):
        return x
    raise FeasibleNotFound("constraint system has no binary solution")


# ---------------------------------------------------------------- JSON format


def problem_to_dict(p: Problem) -> dict:
    obj = p.objective
    return {
        "num_vars": p.num_vars,
        "var_names": list(p.var_names),
        "objective": {
            "direction": obj.direction,
            "constant": str(obj.constant),
            "linear": [[i, str(c)] for i, c in obj.linear.items()],
            "quadratic": [[i, j, str(c)] for (i, j), c in obj.quadratic.items()],
        },
        "constraints": [{"coeffs": list(c), "rhs": b} for c, b in p.constraints.rows],
    }


def problem_from_dict(d: Mapping) -> Problem:
    o = d.get("objective", {})
    objective = Objective(
        direction=o.get("direction", MINIMIZE),
        constant=to_decimal(o.get("constant", "0")),
        linear={int(i): to_decimal(c) for i, c in o.get("linear", [])},
        quadratic={(int(i), int(j)): to_decimal(c) for i, j, c in o.get("quadratic", [])},
    )
    rows = tuple((tuple(r["coeffs"]), r["rhs"]) for r in d.get("constraints", []))
    for coeffs, rhs in rows:
        if any(isinstance(c, float) or isinstance(c, bool) for c in coeffs) or isinstance(rhs, float):
            raise ValueError("constraint coefficients must be integers")
    return Problem(
        num_vars=int(d["num_vars"]),
        objective=objective,
        constraints=ConstraintSystem(rows),
        var_names=tuple(d.get("var_names", ())),
    )


def dumps_problem(p: Problem) -> str:
    return json.dumps(problem_to_dict(p), indent=2)


def load_problem(path: str | Path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def save_problem(p: Problem, path: str | Path) -> None:
    Path(path).write_text(dumps_problem(p) + "\n", encoding="utf-8")


def p0_problem() -> Problem:
    """Four-variable running example: maximize x1 + x3 s.t. x1 - x3 = 0, x1 + x2 + x4 = 1."""
    return Problem(
        num_vars=4,
        objective=Objective(direction=MAXIMIZE, linear={0: 1, 2: 1}),
        constraints=ConstraintSystem.from_matrix([[1, 0, -1, 0], [1, 1, 0, 1]], [0, 1]),
    )
