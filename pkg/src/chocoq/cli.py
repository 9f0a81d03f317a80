"""Command-line front end: ``chocoq {solve,bench,decompose,oracle}``.

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import generators
from .circuit import (
    MCP_COST_OFFSET,
    MCP_COST_PER_CONTROL,
    ParameterVector,
    assemble_chocoq_circuit,
    build_g_gates,
    depth_and_counts,
    export_circuit,
)
from .elimination import build_elimination_plan
from .hamiltonian import DriverTerm, SizeLimitError, build_objective_diagonal
from .nullspace import BasisNotFound, pairwise_extension, solve_basis
from .optimizer import NonFiniteObjective, OptimizerConfig
from .problem import (
    FeasibleNotFound,
    InfeasibleConstraint,
    Problem,
    find_feasible,
    load_problem,
    p0_problem,
    str_to_bits,
)
from .simulator import NormDriftError
from .solvers import METHODS, RunReport, SolverSpec, brute_force_oracle, solve, sub_seed

log = logging.getLogger("chocoq")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
DEFAULT_LAYERS = {"chocoq": 1, "penalty": 7, "cyclic": 7}
CSV_COLUMNS = [
    "benchmark", "method", "layers", "shots", "seed", "success_rate", "in_constraints_rate",
    "arg", "depth_logical", "depth_estimated", "iters", "wall_time_ms", "compile_ms", "execute_ms",
]
SOLVER_ERRORS = (BasisNotFound, FeasibleNotFound, NormDriftError, NonFiniteObjective, FloatingPointError)


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ problems


def _add_source_args(ap: argparse.ArgumentParser, require_family: bool = False) -> None:
    if not require_family:
        ap.add_argument("--problem", help="problem JSON file")
    ap.add_argument("--family", choices=("p0", "flp", "gcp", "kpp"), help="built-in generator")
    ap.add_argument("--facilities", type=int, default=2)
    ap.add_argument("--demands", type=int, default=1)
    ap.add_argument("--vertices", type=int, default=3)
    ap.add_argument("--edges", type=int, default=2, help="number of random edges")
    ap.add_argument("--colors", type=int, default=2)
    ap.add_argument("--blocks", type=int, default=2)


def _generate(args, seed: int) -> tuple[str, Problem]:
    fam = args.family
    if fam == "p0":
        return "p0", p0_problem()
    if fam == "flp":
        name = f"flp-{args.facilities}x{args.demands}"
        return name, generators.random_flp(args.facilities, args.demands, seed)
    if fam == "gcp":
        name = f"gcp-v{args.vertices}e{args.edges}c{args.colors}"
        return name, generators.random_gcp(args.vertices, args.edges, args.colors, seed)
    name = f"kpp-v{args.vertices}e{args.edges}b{args.blocks}"
    return name, generators.random_kpp(args.vertices, args.edges, args.blocks, seed)


def _load_source(args) -> tuple[str, Problem]:
    problem = getattr(args, "problem", None)
    if (problem is None) == (args.family is None):
        raise ConfigError("give exactly one of --problem or --family")
    if problem is not None:
        path = Path(problem)
        if not path.is_file():
            raise ConfigError(f"problem file not found: {path}")
        try:
            return path.stem, load_problem(path)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid problem file {path}: {exc}") from exc
    try:
        return _generate(args, sub_seed(args.seed, "generator"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------- specs


def _add_run_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--layers", type=int, help="QAOA layers (default: 1 for chocoq, 7 otherwise)")
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-iters", type=int, default=100)
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--lambda-pen", type=float, default=10.0)
    ap.add_argument("--eliminate", type=int, default=0, help="variables to eliminate (chocoq)")
    ap.add_argument("--overcomplete", action="store_true", help="extra pairwise driver terms (chocoq)")
    ap.add_argument("--norm", choices=("l1", "l2"), default="l2")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--record-timing", action="store_true", help="fill the wall-time columns")


def _parse_methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        raise ConfigError(f"unknown method(s) {bad or text!r}; choose from {','.join(METHODS)}")
    return methods


def _spec(args, method: str, initial_state=None) -> SolverSpec:
    try:
        return SolverSpec(
            method=method,
            layers=args.layers if args.layers is not None else DEFAULT_LAYERS[method],
            shots=args.shots,
            seed=args.seed,
            eliminate=args.eliminate if method == "chocoq" else 0,
            lambda_pen=args.lambda_pen,
            optimizer=OptimizerConfig(max_iters=args.max_iters, restarts=args.restarts),
            initial_state=initial_state,
            overcomplete=args.overcomplete and method == "chocoq",
            norm=args.norm,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run(job: tuple[Problem, SolverSpec]) -> RunReport:
    p, spec = job
    return solve(p, spec)


def _run_all(jobs: list[tuple[Problem, SolverSpec]], workers: int) -> list[RunReport]:
    if workers < 1:
        raise ConfigError("--jobs must be >= 1")
    if workers == 1 or len(jobs) < 2:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps declared order whatever the completion order
        return list(pool.map(_run, jobs))


def _fmt(x) -> str:
    return "" if x is None else repr(x) if isinstance(x, float) else str(x)


def csv_row(benchmark: str, spec: SolverSpec, r: RunReport, timing: bool) -> dict:
    compile_ms = r.wall_times.get("compile_ms")
    execute_ms = r.wall_times.get("execute_ms")
    return {
        "benchmark": benchmark,
        "method": spec.method,
        "layers": spec.layers,
        "shots": spec.shots,
        "seed": spec.seed,
        "success_rate": _fmt(r.success_rate),
        "in_constraints_rate": _fmt(r.in_constraints_rate),
        "arg": _fmt(r.arg),
        "depth_logical": r.depth_logical,
        "depth_estimated": r.depth_estimated,
        "iters": r.iterations,
        "wall_time_ms": f"{compile_ms + execute_ms:.3f}" if timing else "",
        "compile_ms": f"{compile_ms:.3f}" if timing else "",
        "execute_ms": f"{execute_ms:.3f}" if timing else "",
    }


def _write_csv(rows: list[dict], dest) -> None:
    w = csv.DictWriter(dest, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    _write_csv(rows, buf)
    return buf.getvalue()


def _spec_dict(spec: SolverSpec) -> dict:
    return {
        "method": spec.method,
        "layers": spec.layers,
        "shots": spec.shots,
        "seed": spec.seed,
        "eliminate": spec.eliminate,
        "lambda_pen": spec.lambda_pen,
        "max_iters": spec.optimizer.max_iters,
        "restarts": spec.optimizer.restarts,
        "overcomplete": spec.overcomplete,
        "norm": spec.norm,
    }


# ------------------------------------------------------------------ commands


def cmd_solve(args) -> int:
    name, p = _load_source(args)
    init = None
    if args.initial_state:
        init = str_to_bits(args.initial_state)
        if len(init) != p.num_vars:
            raise ConfigError(f"--initial-state needs {p.num_vars} bits")
    specs = [_spec(args, m, init) for m in _parse_methods(args.method)]
    reports = _run_all([(p, s) for s in specs], args.jobs)
    oracle = brute_force_oracle(p).to_dict()
    docs = []
    rows = []
    for spec, r in zip(specs, reports):
        docs.append({
            "benchmark": name,
            "spec": _spec_dict(spec),
            "oracle": oracle,
            "report": r.to_dict(include_timing=args.record_timing),
        })
        rows.append(csv_row(name, spec, r, args.record_timing))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for spec, doc in zip(specs, docs):
            (out / f"{name}_{spec.method}.json").write_text(json.dumps(doc, indent=2) + "\n")
        (out / "runs.csv").write_text(_csv_text(rows))
    else:
        print(json.dumps(docs if len(docs) > 1 else docs[0], indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    methods = _parse_methods(args.methods)
    if args.instances < 1:
        raise ConfigError("--instances must be >= 1")
    jobs, labels = [], []
    for i in range(args.instances):
        try:
            name, p = _generate(args, sub_seed(args.seed, f"instance{i}"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for m in methods:
            spec = _spec(args, m)
            jobs.append((p, spec))
            labels.append(f"{name}#{i}")
    reports = _run_all(jobs, args.jobs)
    rows = [csv_row(lab, spec, r, args.record_timing) for lab, (_, spec), r in zip(labels, jobs, reports)]
    if args.out:
        Path(args.out).write_text(_csv_text(rows))
    else:
        _write_csv(rows, sys.stdout)
    return EXIT_OK


def _gate_summary(gates) -> str:
    counts: dict[str, int] = {}
    for g in gates:
        counts[g.kind] = counts.get(g.kind, 0) + 1
    return " + ".join(f"{v} {k}" for k, v in counts.items())


def cmd_decompose(args) -> int:
    name, p = _load_source(args)
    basis = solve_basis(p.constraints, p.num_vars)
    if args.dump_basis:
        Path(args.dump_basis).write_text(json.dumps([list(u) for u in basis.vectors]) + "\n")
    vectors = pairwise_extension(basis) if args.overcomplete else basis.vectors
    print(f"problem {name}: {p.num_vars} variables, {len(p.constraints)} constraints")
    print(f"null-space basis: {basis.rank} vectors, {basis.nonzeros()} nonzeros")
    if not vectors:
        print("warning: constraints fix every variable, the driver is empty", file=sys.stderr)
    terms = [DriverTerm(u) for u in vectors]
    for k, t in enumerate(terms, 1):
        g = build_g_gates(t)
        listing = " ".join(
            f"{gate.kind}({','.join(f'q{q}' for q in gate.qubits)})" for gate in g
        )
        print(f"u{k} = {list(t.u)}")
        print(f"  G: {_gate_summary(g)}: {listing}")
    x0 = find_feasible(p)
    circuit = assemble_chocoq_circuit(p, build_objective_diagonal(p), terms, args.layers or 1, x0)
    d_log, counts = depth_and_counts(circuit, "logical")
    d_est, _ = depth_and_counts(circuit, "estimated", args.mcp_per_control, args.mcp_offset)
    print(f"initial state: {''.join(map(str, x0))}")
    print(f"depth (logical): {d_log}")
    print(f"depth (estimated, mcp = {args.mcp_per_control}*controls + {args.mcp_offset}): {d_est}")
    print("gate counts: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    if args.eliminate:
        plan = build_elimination_plan(p, basis, args.eliminate)
        picked = ", ".join(p.var_names[i] for i in plan.eliminated_vars)
        print(f"eliminated: {picked}; basis nonzeros {basis.nonzeros()} -> {plan.bases[-1].nonzeros()}")
    if args.emit_qasm:
        layers = circuit.layers
        params = ParameterVector((0.0,) * layers, (0.0,) * layers)
        Path(args.emit_qasm).write_text(export_circuit(circuit, params))
    return EXIT_OK


def cmd_oracle(args) -> int:
    name, p = _load_source(args)
    try:
        result = brute_force_oracle(p)
    except SizeLimitError as exc:
        raise ConfigError(str(exc)) from exc
    d = result.to_dict()
    out = {k: d[k] for k in ("optimal_value", "optimum", "feasible_count") if k in d}
    print(json.dumps(out))
    return EXIT_OK


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chocoq", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run solvers on one problem")
    _add_source_args(s)
    _add_run_args(s)
    s.add_argument("--method", default="chocoq", help="comma-separated: chocoq,penalty,cyclic")
    s.add_argument("--initial-state", help="feasible start bitstring x1..xn")
    s.add_argument("--out", help="directory for JSON reports and runs.csv")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run methods over generated instances, write CSV")
    _add_source_args(b, require_family=True)
    _add_run_args(b)
    b.add_argument("--methods", default="chocoq,penalty,cyclic")
    b.add_argument("--instances", type=int, default=1)
    b.add_argument("--out", help="CSV file (default stdout)")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("decompose", help="print the driver basis and its gate decomposition")
    _add_source_args(d)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--layers", type=int, default=1)
    d.add_argument("--eliminate", type=int, default=0)
    d.add_argument("--overcomplete", action="store_true")
    d.add_argument("--mcp-per-control", type=int, default=MCP_COST_PER_CONTROL)
    d.add_argument("--mcp-offset", type=int, default=MCP_COST_OFFSET)
    d.add_argument("--emit-qasm", help="write the circuit text here")
    d.add_argument("--dump-basis", help="write the basis as JSON here")
    d.set_defaults(func=cmd_decompose)

    o = sub.add_parser("oracle", help="exact optimum by enumeration")
    _add_source_args(o)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InfeasibleConstraint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
