"""End-to-end pipelines: commuting-driver QAOA, penalty QAOA and cyclic (XY) QAOA.

Every run ends with the same metrics against an exhaustive classical oracle, so the
three methods are directly comparable.  All randomness is derived from
``SolverSpec.seed`` through named sub-seeds.
"""
from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass, field, replace
from decimal import Decimal

import numpy as np

from .circuit import (
    MCP_COST_OFFSET,
    MCP_COST_PER_CONTROL,
    Circuit,
    ParameterVector,
    assemble_chocoq_circuit,
    assemble_cyclic_circuit,
    assemble_penalty_circuit,
    depth_and_counts,
)
from .elimination import EliminationPlan, merge_assignment
from .hamiltonian import (
    DriverTerm,
    SizeLimitError,
    build_cyclic_driver,
    build_driver_terms,
    build_objective_diagonal,
    build_penalty_objective,
)
from .nullspace import pairwise_extension, solve_basis
from .optimizer import OptimizerConfig, OptTrace, optimize
from .problem import (
    FeasibleNotFound,
    Problem,
    bits_to_str,
    check_feasible,
    evaluate_objective,
    find_feasible,
    iter_feasible,
    residuals,
    str_to_bits,
)
from .simulator import SampleSet, expectation_diagonal, prepare_basis_state, sample, simulate

METHODS = ("chocoq", "penalty", "cyclic")
ORACLE_MAX_VARS = 30
LAMBDA_ARG = 10.0


def sub_seed(seed: int, name: str) -> int:
    """Stable 32-bit seed for one named consumer of randomness."""
    return zlib.crc32(f"{seed}/{name}".encode())


@dataclass(frozen=True)
class SolverSpec:
    method: str = "chocoq"
    layers: int = 1
    shots: int = 10_000
    seed: int = 0
    eliminate: int = 0
    lambda_pen: float = 10.0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    # feasible starting assignment for chocoq/cyclic; None means find_feasible
    initial_state: tuple[int, ...] | None = None
    use_fastpath: bool = True
    # append pairwise sums/differences of basis vectors as extra driver terms
    overcomplete: bool = False
    lambda_arg: float = LAMBDA_ARG
    norm: str = "l2"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.eliminate < 0:
            raise ValueError("eliminate must be >= 0")
        if self.eliminate and self.method != "chocoq":
            raise ValueError("variable elimination is only available for chocoq")
        if self.lambda_pen <= 0:
            raise ValueError("lambda_pen must be positive")
        if self.norm not in ("l1", "l2"):
            raise ValueError("norm must be 'l1' or 'l2'")


@dataclass(frozen=True)
class OracleResult:
    optimal_value: Decimal | None
    optimal_set: tuple[tuple[int, ...], ...]
    feasible_count: int
    direction: str

    def to_dict(self) -> dict:
        d: dict = {"feasible_count": self.feasible_count}
        if self.feasible_count:
            d["optimal_value"] = str(self.optimal_value)
            d["optimum"] = bits_to_str(self.optimal_set[0])
            d["optimal_set"] = [bits_to_str(x) for x in self.optimal_set]
        return d


def brute_force_oracle(p: Problem) -> OracleResult:
    """Exact optimum by enumerating every feasible assignment (pruned DFS)."""
    if p.num_vars > ORACLE_MAX_VARS:
        raise SizeLimitError(f"oracle is capped at {ORACLE_MAX_VARS} variables, got {p.num_vars}")
    sign = p.objective.sign
    best: Decimal | None = None
    best_set: list[tuple[int, ...]] = []
    count = 0
    for x in iter_feasible(p):
        count += 1
        f = evaluate_objective(p, x) * sign
        if best is None or f < best:
            best, best_set = f, [x]
        elif f == best:
            best_set.append(x)
    value = None if best is None else best * sign
    return OracleResult(value, tuple(best_set), count, p.direction)


@dataclass(frozen=True)
class Metrics:
    success_rate: float
    in_constraints_rate: float
    arg: float | None


def compute_metrics(
    samples: SampleSet,
    oracle: OracleResult,
    p: Problem,
    lambda_arg: float = LAMBDA_ARG,
    norm: str = "l2",
) -> Metrics:
    """Success rate, in-constraints rate and approximation-ratio gap of a sample set.

    ARG is ``|E[f(x) + lambda * ||Cx - c||] / f_opt - 1|`` with ``f`` in the problem's
    own direction; it is ``None`` when ``f_opt`` is zero or no feasible point exists.
    """
    total = sum(samples.counts.values())
    if total == 0:
        raise ValueError("empty sample set")
    optimal = {bits_to_str(x) for x in oracle.optimal_set}
    hits = feasible = 0
    weighted = []
    for key, count in samples.counts.items():
        x = str_to_bits(key)
        if len(x) != p.num_vars:
            raise ValueError(f"sample {key!r} does not have {p.num_vars} bits")
        r = residuals(p, x)
        if not any(r):
            feasible += count
            if key in optimal:
                hits += count
        dist = math.sqrt(sum(v * v for v in r)) if norm == "l2" else float(sum(abs(v) for v in r))
        weighted.append(count * (float(evaluate_objective(p, x)) + lambda_arg * dist))
    arg = None
    if oracle.feasible_count and oracle.optimal_value != 0:
        arg = abs(math.fsum(weighted) / total / float(oracle.optimal_value) - 1.0)
    return Metrics(hits / total, feasible / total, arg)


@dataclass(frozen=True)
class RunReport:
    method: str
    num_qubits: int
    success_rate: float
    in_constraints_rate: float
    arg: float | None
    samples: SampleSet
    depth_logical: int
    depth_estimated: int
    gate_counts: dict
    opt_trace: OptTrace
    best_params: tuple[float, ...]
    wall_times: dict = field(default_factory=dict)  # milliseconds per phase
    sub_reports: tuple = ()

    @property
    def iterations(self) -> int:
        return self.opt_trace.evaluations + sum(r.iterations for r in self.sub_reports)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "method": self.method,
            "num_qubits": self.num_qubits,
            "success_rate": self.success_rate,
            "in_constraints_rate": self.in_constraints_rate,
            "arg": self.arg,
            "depth_logical": self.depth_logical,
            "depth_estimated": self.depth_estimated,
            "gate_counts": self.gate_counts,
            "iterations": self.iterations,
            "best_value": self.opt_trace.best_value if self.opt_trace.entries else None,
            "best_params": list(self.best_params),
            "shots": self.samples.shots,
            "counts": dict(sorted(self.samples.counts.items())),
        }
        if self.sub_reports:
            d["sub_reports"] = [r.to_dict(include_timing) for r in self.sub_reports]
        if include_timing:
            d["wall_times_ms"] = dict(self.wall_times)
        return d


# ------------------------------------------------------------------ pipelines


@dataclass(frozen=True)
class _Compiled:
    circuit: Circuit
    cost: np.ndarray  # diagonal the optimiser minimises


def _compile(p: Problem, spec: SolverSpec) -> _Compiled:
    n = p.num_vars
    if spec.method == "chocoq":
        basis = solve_basis(p.constraints, n)
        if spec.overcomplete:
            terms = [DriverTerm(u) for u in pairwise_extension(basis)]
        else:
            terms = build_driver_terms(basis)
        diag = build_objective_diagonal(p)
        x0 = spec.initial_state if spec.initial_state is not None else find_feasible(p)
        return _Compiled(assemble_chocoq_circuit(p, diag, terms, spec.layers, x0), diag.values)
    if spec.method == "penalty":
        diag = build_penalty_objective(p, spec.lambda_pen)
        return _Compiled(assemble_penalty_circuit(n, diag, spec.layers), diag.values)
    x0 = spec.initial_state if spec.initial_state is not None else find_feasible(p)
    if not check_feasible(p, x0):
        raise ValueError("initial assignment does not satisfy the constraints")
    diag = build_objective_diagonal(p)
    # the XY mixer can leave the feasible set for mixed-sign rows, so the optimiser
    # sees the penalised cost even though the phase layer uses the bare objective
    cost = build_penalty_objective(p, spec.lambda_pen).values
    circuit = assemble_cyclic_circuit(n, diag, build_cyclic_driver(p), spec.layers, x0)
    return _Compiled(circuit, cost)


def solve(p: Problem, spec: SolverSpec, oracle: OracleResult | None = None) -> RunReport:
    if spec.eliminate:
        from .elimination import build_elimination_plan

        plan = build_elimination_plan(p, solve_basis(p.constraints, p.num_vars), spec.eliminate)
        return solve_with_elimination(p, spec, plan, oracle)

    t0 = time.perf_counter()
    compiled = _compile(p, spec)
    circuit = compiled.circuit
    depth_l, counts = depth_and_counts(circuit, "logical")
    depth_e, _ = depth_and_counts(circuit, "estimated", MCP_COST_PER_CONTROL, MCP_COST_OFFSET)
    t1 = time.perf_counter()

    n = p.num_vars
    init = prepare_basis_state(n, [0] * n)  # the circuit prepares its own start state

    def energy(theta: np.ndarray) -> float:
        sv = simulate(circuit, ParameterVector.from_flat(theta), init, spec.use_fastpath)
        return expectation_diagonal(sv, compiled.cost)

    cfg = replace(spec.optimizer, seed=sub_seed(spec.seed, "optimizer"))
    trace = optimize(energy, circuit.num_params, cfg)
    if not trace.best_theta:
        raise FloatingPointError("every optimiser restart aborted on a non-finite value")
    best = ParameterVector.from_flat(trace.best_theta)
    final = simulate(circuit, best, init, spec.use_fastpath)
    samples = sample(final, spec.shots, sub_seed(spec.seed, "sampling"))
    t2 = time.perf_counter()

    if oracle is None:
        oracle = brute_force_oracle(p)
    m = compute_metrics(samples, oracle, p, spec.lambda_arg, spec.norm)
    return RunReport(
        method=spec.method,
        num_qubits=n,
        success_rate=m.success_rate,
        in_constraints_rate=m.in_constraints_rate,
        arg=m.arg,
        samples=samples,
        depth_logical=depth_l,
        depth_estimated=depth_e,
        gate_counts=counts,
        opt_trace=trace,
        best_params=tuple(trace.best_theta),
        wall_times={"compile_ms": (t1 - t0) * 1e3, "execute_ms": (t2 - t1) * 1e3},
    )


def solve_with_elimination(
    p: Problem, spec: SolverSpec, plan: EliminationPlan, oracle: OracleResult | None = None
) -> RunReport:
    """Solve each feasible branch of ``plan`` and pool the samples.

    Every branch contributes ``spec.shots`` shots; bitstrings are extended back to
    the original variables before metrics are taken against ``p``'s own oracle.
    """
    sub_spec = replace(spec, eliminate=0, initial_state=None)
    reports = []
    pooled: dict[str, int] = {}
    for idx, sub in enumerate(plan.sub_instances):
        if sub.problem is None:
            continue
        try:
            x0 = find_feasible(sub.problem)
        except FeasibleNotFound:
            continue
        branch = replace(sub_spec, seed=sub_seed(spec.seed, f"branch{idx}"), initial_state=x0)
        r = solve(sub.problem, branch)
        reports.append(r)
        for key, count in r.samples.counts.items():
            full = bits_to_str(merge_assignment(sub, str_to_bits(key), p.num_vars))
            pooled[full] = pooled.get(full, 0) + count
    if not reports:
        raise FeasibleNotFound("every elimination branch is infeasible")

    samples = SampleSet(dict(sorted(pooled.items())), spec.shots * len(reports))
    if oracle is None:
        oracle = brute_force_oracle(p)
    m = compute_metrics(samples, oracle, p, spec.lambda_arg, spec.norm)
    wall = {
        k: sum(r.wall_times.get(k, 0.0) for r in reports) for k in ("compile_ms", "execute_ms")
    }
    counts: dict[str, int] = {}
    for r in reports:
        for k, v in r.gate_counts.items():
            counts[k] = counts.get(k, 0) + v
    return RunReport(
        method=spec.method,
        num_qubits=max(r.num_qubits for r in reports),
        success_rate=m.success_rate,
        in_constraints_rate=m.in_constraints_rate,
        arg=m.arg,
        samples=samples,
        depth_logical=max(r.depth_logical for r in reports),
        depth_estimated=max(r.depth_estimated for r in reports),
        gate_counts=dict(sorted(counts.items())),
        opt_trace=OptTrace(),
        best_params=(),
        wall_times=wall,
        sub_reports=tuple(reports),
    )
