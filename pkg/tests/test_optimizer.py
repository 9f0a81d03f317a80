from __future__ import annotations

import math

import numpy as np
import pytest

from chocoq.circuit import ParameterVector, assemble_chocoq_circuit
from chocoq.hamiltonian import build_driver_terms, build_objective_diagonal
from chocoq.nullspace import solve_basis
from chocoq.optimizer import OptimizerConfig, optimize
from chocoq.simulator import expectation_diagonal, simulate


def quadratic(theta):
    return float(np.sum((theta - np.array([0.3, -0.7])) ** 2))


def test_converges_on_quadratic():
    trace = optimize(quadratic, 2, OptimizerConfig(max_iters=200, restarts=1))
    assert trace.best_value < 1e-4 ** 2 * 2
    assert np.allclose(trace.best_theta, [0.3, -0.7], atol=1e-4)
    assert trace.evaluations <= 200 + 3


def test_constant_objective_stops_and_reports():
    trace = optimize(lambda t: 1.5, 4, OptimizerConfig(max_iters=50, restarts=2))
    assert trace.best_value == 1.5
    assert 0 < trace.evaluations <= 2 * (50 + 5)


def test_first_restart_starts_from_initial_value():
    trace = optimize(quadratic, 2, OptimizerConfig(restarts=1))
    assert trace.entries[0][2] == (0.1, 0.1)


@pytest.mark.parametrize("max_iters,restarts", [(5, 1), (20, 3), (100, 3)])
def test_budget_respected(max_iters, restarts):
    calls = []

    def fn(t):
        calls.append(1)
        return float(np.sin(t).sum())

    trace = optimize(fn, 4, OptimizerConfig(max_iters=max_iters, restarts=restarts, tol=1e-12))
    assert len(calls) == trace.evaluations <= restarts * (max_iters + 4 + 1)
    assert {r for _, r, _, _ in trace.entries} == set(range(restarts))


def test_best_so_far_is_monotone():
    trace = optimize(lambda t: float(np.cos(3 * t).sum() + 0.1 * t @ t), 2, OptimizerConfig(restarts=3))
    best = trace.best_so_far()
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert best[-1] == trace.best_value


def test_deterministic_given_seed():
    def fn(t):
        return float(np.sin(t).sum())

    a = optimize(fn, 2, OptimizerConfig(seed=4))
    b = optimize(fn, 2, OptimizerConfig(seed=4))
    c = optimize(fn, 2, OptimizerConfig(seed=5))
    assert a.entries == b.entries
    assert a.entries != c.entries


def test_non_finite_aborts_restart(caplog):
    def fn(t):
        return math.nan if t[0] > 1.0 else float(t @ t)

    trace = optimize(fn, 2, OptimizerConfig(restarts=3, seed=1))
    assert trace.aborted
    assert math.isfinite(trace.best_value)


def test_wrapped_best():
    trace = optimize(lambda t: float(((t - 7.0) ** 2).sum()), 2, OptimizerConfig(restarts=1, max_iters=300))
    assert all(0 <= v < 2 * math.pi for v in trace.wrapped_best())


def test_rejects_bad_dimensions_and_config():
    with pytest.raises(ValueError):
        optimize(quadratic, 3, OptimizerConfig())
    with pytest.raises(ValueError):
        OptimizerConfig(max_iters=0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)


def test_p0_reaches_internal_optimum(p0):
    terms = build_driver_terms(solve_basis(p0.constraints, 4))
    diag = build_objective_diagonal(p0)
    c = assemble_chocoq_circuit(p0, diag, terms, 1, (0, 1, 0, 0))

    def energy(theta):
        return expectation_diagonal(simulate(c, ParameterVector.from_flat(theta)), diag)

    trace = optimize(energy, 2, OptimizerConfig(max_iters=100, restarts=3, seed=0))
    assert trace.best_value == pytest.approx(-2, abs=1e-3)
