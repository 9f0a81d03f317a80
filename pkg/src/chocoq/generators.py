"""Benchmark families: facility location, graph coloring, k-partition.

Inequalities are turned into equalities with ancilla variables, so every instance is
a plain :class:`~chocoq.problem.Problem`.  Instances may be infeasible (an
under-coloured graph, say); that only shows up when a feasible point is searched for.
"""
from __future__ import annotations

from decimal import Decimal
from itertools import combinations
from typing import Sequence

import numpy as np

from .problem import MAXIMIZE, MINIMIZE, ConstraintSystem, Objective, Problem, to_decimal


def _row(n: int, entries: dict[int, int]) -> tuple[int, ...]:
    r = [0] * n
    for i, c in entries.items():
        r[i] += c
    return tuple(r)


def generate_flp(
    num_facilities: int,
    num_demands: int,
    open_costs: Sequence,
    supply_costs: Sequence[Sequence],
) -> Problem:
    """Uncapacitated facility location.

    Variables, in order: ``o_f`` (facility open), ``s_{d,f}`` (demand d served by f),
    ``a_{d,f}`` (slack for ``s_{d,f} <= o_f``).
    """
    F, D = num_facilities, num_demands
    if F < 1:
        raise ValueError("need at least one facility")
    if len(open_costs) != F or len(supply_costs) != D or any(len(r) != F for r in supply_costs):
        raise ValueError("cost arrays do not match the facility/demand counts")
    n = F + 2 * D * F

    def s(d, f):
        return F + d * F + f

    def a(d, f):
        return F + D * F + d * F + f

    names = [f"o_{f + 1}" for f in range(F)]
    names += [f"s_{d + 1}_{f + 1}" for d in range(D) for f in range(F)]
    names += [f"a_{d + 1}_{f + 1}" for d in range(D) for f in range(F)]
    rows = [(_row(n, {s(d, f): 1 for f in range(F)}), 1) for d in range(D)]
    rows += [
        (_row(n, {s(d, f): 1, a(d, f): 1, f: -1}), 0) for d in range(D) for f in range(F)
    ]
    linear = {f: to_decimal(open_costs[f]) for f in range(F)}
    linear.update({s(d, f): to_decimal(supply_costs[d][f]) for d in range(D) for f in range(F)})
    return Problem(n, Objective(MINIMIZE, linear=linear), ConstraintSystem(tuple(rows)), tuple(names))


def _check_graph(num_vertices: int, edges: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop on vertex {i}")
        if not (0 <= i < num_vertices and 0 <= j < num_vertices):
            raise ValueError(f"edge ({i}, {j}) references a missing vertex")
        out.append((i, j))
    if len({tuple(sorted(e)) for e in out}) != len(out):
        raise ValueError("duplicate edge")
    return out


def generate_gcp(num_vertices: int, edges: Sequence[tuple[int, int]], num_colors: int) -> Problem:
    """Graph coloring with one ancilla per (edge, color) for ``x_ik + x_jk <= 1``.

    The objective ``sum_{i,k} (k+1) x_ik`` prefers low color indices, so an optimum
    packs the coloring into the fewest, lowest colors.
    """
    if num_colors < 1:
        raise ValueError("num_colors must be >= 1")
    edges = _check_graph(num_vertices, edges)
    V, C, E = num_vertices, num_colors, len(edges)
    n = V * C + E * C

    def x(i, k):
        return i * C + k

    def anc(e, k):
        return V * C + e * C + k

    names = [f"x_{i + 1}_{k + 1}" for i in range(V) for k in range(C)]
    names += [f"a_{i + 1}_{j + 1}_{k + 1}" for i, j in edges for k in range(C)]
    rows = [(_row(n, {x(i, k): 1 for k in range(C)}), 1) for i in range(V)]
    rows += [
        (_row(n, {x(i, k): 1, x(j, k): 1, anc(e, k): 1}), 1)
        for e, (i, j) in enumerate(edges)
        for k in range(C)
    ]
    linear = {x(i, k): Decimal(k + 1) for i in range(V) for k in range(C)}
    return Problem(n, Objective(MINIMIZE, linear=linear), ConstraintSystem(tuple(rows)), tuple(names))


def generate_kpp(
    num_vertices: int,
    edges: Sequence[tuple[int, int]],
    edge_weights: Sequence,
    capacities: Sequence[int],
) -> Problem:
    """K-partition maximising the total weight of cut edges, block sizes fixed."""
    edges = _check_graph(num_vertices, edges)
    if len(edge_weights) != len(edges):
        raise ValueError("one weight per edge required")
    if sum(capacities) != num_vertices or any(m < 0 for m in capacities):
        raise ValueError("block capacities must be non-negative and sum to the vertex count")
    V, K = num_vertices, len(capacities)
    n = V * K

    def x(i, k):
        return i * K + k

    names = [f"x_{i + 1}_{k + 1}" for i in range(V) for k in range(K)]
    rows = [(_row(n, {x(i, k): 1 for k in range(K)}), 1) for i in range(V)]
    rows += [(_row(n, {x(i, k): 1 for i in range(V)}), capacities[k]) for k in range(K)]
    weights = [to_decimal(w) for w in edge_weights]
    quadratic: dict[tuple[int, int], Decimal] = {}
    for (i, j), w in zip(edges, weights):
        for k in range(K):
            key = (x(i, k), x(j, k))
            quadratic[key] = quadratic.get(key, Decimal(0)) - w
    objective = Objective(MAXIMIZE, constant=sum(weights, Decimal(0)), quadratic=quadratic)
    return Problem(n, objective, ConstraintSystem(tuple(rows)), tuple(names))


# ----------------------------------------------------------- seeded instances


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _cost(rng: np.random.Generator, lo: float, hi: float) -> Decimal:
    # one decimal place keeps costs exact and readable
    return Decimal(int(rng.integers(round(lo * 10), round(hi * 10) + 1))) / 10


def random_edges(num_vertices: int, num_edges: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    pairs = list(combinations(range(num_vertices), 2))
    if num_edges > len(pairs):
        raise ValueError(f"a simple graph on {num_vertices} vertices has at most {len(pairs)} edges")
    chosen = rng.choice(len(pairs), size=num_edges, replace=False)
    return sorted(pairs[int(i)] for i in chosen)


def random_flp(num_facilities: int, num_demands: int, seed: int, cost_range=(1.0, 10.0)) -> Problem:
    rng = _rng(seed)
    co = [_cost(rng, *cost_range) for _ in range(num_facilities)]
    cs = [[_cost(rng, *cost_range) for _ in range(num_facilities)] for _ in range(num_demands)]
    return generate_flp(num_facilities, num_demands, co, cs)


def random_gcp(num_vertices: int, num_edges: int, num_colors: int, seed: int) -> Problem:
    return generate_gcp(num_vertices, random_edges(num_vertices, num_edges, _rng(seed)), num_colors)


def balanced_capacities(num_vertices: int, num_blocks: int) -> list[int]:
    base, extra = divmod(num_vertices, num_blocks)
    return [base + (1 if k < extra else 0) for k in range(num_blocks)]


def random_kpp(
    num_vertices: int, num_edges: int, num_blocks: int, seed: int, weight_range=(0.1, 1.0)
) -> Problem:
    rng = _rng(seed)
    edges = random_edges(num_vertices, num_edges, rng)
    weights = [_cost(rng, *weight_range) for _ in edges]
    return generate_kpp(num_vertices, edges, weights, balanced_capacities(num_vertices, num_blocks))
