"""Derivative-free parameter search (Nelder-Mead with seeded restarts)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

log = logging.getLogger(__name__)


class NonFiniteObjective(ArithmeticError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 100
    restarts: int = 3
    seed: int = 0
    initial_value: float = 0.1
    # later restarts draw uniformly from this box
    restart_range: tuple[float, float] = (0.0, math.pi)
    step: float = 0.5
    tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class OptTrace:
    # (evaluation index, restart, theta, value), one entry per objective call
    entries: list[tuple[int, int, tuple[float, ...], float]] = field(default_factory=list)
    best_theta: tuple[float, ...] = ()
    best_value: float = math.inf
    aborted: list[str] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.entries)

    def best_so_far(self) -> list[float]:
        out, best = [], math.inf
        for _, _, _, v in self.entries:
            best = min(best, v)
            out.append(best)
        return out

    def wrapped_best(self) -> tuple[float, ...]:
        return tuple(t % (2 * math.pi) for t in self.best_theta)


class _Abort(Exception):
    pass


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    sim = np.tile(x0, (x0.size + 1, 1))
    for i in range(x0.size):
        sim[i + 1, i] += step
    return sim


def optimize(objective_fn: Callable[[np.ndarray], float], dim: int, cfg: OptimizerConfig) -> OptTrace:
    """Minimise ``objective_fn`` over ``dim`` parameters.

    Restart 0 starts from ``initial_value`` in every coordinate, later restarts from
    seeded uniform draws.  Each restart may call the objective at most
    ``max_iters + dim + 1`` times and stops early once the simplex spans less than
    ``tol`` in every coordinate.
    """
    if dim < 2 or dim % 2:
        raise ValueError("dim must be an even number >= 2")
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    trace = OptTrace()
    budget = cfg.max_iters + dim + 1

    for restart in range(cfg.restarts):
        if restart == 0:
            x0 = np.full(dim, cfg.initial_value)
        else:
            x0 = rng.uniform(*cfg.restart_range, size=dim)
        calls = 0

        def wrapped(theta: np.ndarray) -> float:
            nonlocal calls
            if calls >= budget:
                raise _Abort("evaluation budget exhausted")
            calls += 1
            value = float(objective_fn(theta))
            theta_t = tuple(float(t) for t in theta)
            if not math.isfinite(value):
                raise NonFiniteObjective(f"objective returned {value} at {theta_t}")
            trace.entries.append((len(trace.entries), restart, theta_t, value))
            if value < trace.best_value:
                trace.best_value, trace.best_theta = value, theta_t
            return value

        try:
            minimize(
                wrapped,
                x0,
                method="Nelder-Mead",
                options={
                    "initial_simplex": _initial_simplex(x0, cfg.step),
                    "maxiter": cfg.max_iters,
                    "maxfev": budget,
                    "xatol": cfg.tol,
                    "fatol": math.inf,  # stop on simplex size alone
                    "adaptive": False,
                },
            )
        except _Abort:
            pass
        except NonFiniteObjective as exc:
            log.warning("restart %d aborted: %s", restart, exc)
            trace.aborted.append(str(exc))
    return trace

