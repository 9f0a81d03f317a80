"""Objective diagonals, commuting driver terms, constraint operators and baselines.

Everything that would be a 2^n x 2^n operator is kept in compact form: diagonals as
vectors, driver terms as their null-space vector ``u``.  Dense matrices are built only
by the ``dense_*`` helpers, which exist as test oracles and refuse n > 12.

Basis-state index convention: variable 0 is the most significant bit, so the bitstring
``x1 x2 ... xn`` read as a binary number is the amplitude index.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .nullspace import ConstraintBasis
from .problem import Problem

DENSE_LIMIT = 12
DEFAULT_MAX_QUBITS = 26


class SizeLimitError(ValueError):
    pass


def max_qubits() -> int:
    return int(os.environ.get("CHOCO_MAX_QUBITS", DEFAULT_MAX_QUBITS))


def bit_table(n: int) -> np.ndarray:
    """``(2^n, n)`` array of bits, row ``idx`` holding the bitstring of ``idx``."""
    idx = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def index_of(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (1 if b else 0)
    return idx


@dataclass(frozen=True, eq=False)
class ObjectiveDiagonal:
    """Diagonal of a cost Hamiltonian in minimize orientation (maximize is negated)."""

    values: np.ndarray
    num_linear: int = 0
    num_quadratic: int = 0

    @property
    def num_qubits(self) -> int:
        return int(self.values.size).bit_length() - 1


def _check_size(n: int) -> None:
    if n > max_qubits():
        raise SizeLimitError(f"{n} qubits exceeds the simulator limit of {max_qubits()}")


def _polynomial_diagonal(n, constant, linear, quadratic) -> np.ndarray:
    bits = bit_table(n).astype(np.float64)
    d = np.full(2**n, float(constant))
    for i, c in linear.items():
        d += float(c) * bits[:, i]
    for (i, j), c in quadratic.items():
        d += float(c) * bits[:, i] * bits[:, j]
    return d


def build_objective_diagonal(p: Problem) -> ObjectiveDiagonal:
    _check_size(p.num_vars)
    obj = p.objective
    d = _polynomial_diagonal(p.num_vars, obj.constant, obj.linear, obj.quadratic) * obj.sign
    return ObjectiveDiagonal(d, len(obj.linear), len(obj.quadratic))


def build_penalty_objective(p: Problem, lambda_pen: float = 10.0) -> ObjectiveDiagonal:
    """``f(x) + lambda * sum_k (C_k x - c_k)^2`` in minimize orientation."""
    if lambda_pen <= 0:
        raise ValueError("lambda_pen must be positive")
    base = build_objective_diagonal(p)
    bits = bit_table(p.num_vars).astype(np.int64)
    penalty = np.zeros(2**p.num_vars)
    pairs = set(p.objective.quadratic)
    singles = set(p.objective.linear)
    for coeffs, rhs in p.constraints.rows:
        res = bits @ np.asarray(coeffs, dtype=np.int64) - rhs
        penalty += (res * res).astype(np.float64)
        support = [i for i, c in enumerate(coeffs) if c]
        singles.update(support)
        pairs.update((a, b) for k, a in enumerate(support) for b in support[k + 1:])
    return ObjectiveDiagonal(base.values + lambda_pen * penalty, len(singles), len(pairs))


@dataclass(frozen=True)
class DriverTerm:
    """``|v><vbar| + |vbar><v|`` on the support of ``u``, identity elsewhere."""

    u: tuple[int, ...]

    def __post_init__(self):
        if not any(self.u):
            raise ValueError("driver term needs a nonzero vector")
        if any(e not in (-1, 0, 1) for e in self.u):
            raise ValueError("driver vector entries must be -1, 0 or 1")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.u) if e)

    @property
    def v(self) -> tuple[int, ...]:
        return tuple((1 + self.u[i]) // 2 for i in self.support)

    @property
    def vbar(self) -> tuple[int, ...]:
        return tuple(1 - b for b in self.v)


def build_driver_terms(basis: ConstraintBasis) -> list[DriverTerm]:
    return [DriverTerm(tuple(u)) for u in basis.vectors]


@dataclass(frozen=True)
class ConstraintOperator:
    """``sum_i c_i Z_i`` for one constraint row; diagonal entry ``sum_i c_i (1 - 2 x_i)``."""

    coeffs: tuple[int, ...]

    def diagonal(self) -> np.ndarray:
        n = len(self.coeffs)
        _check_size(n)
        z = 1 - 2 * bit_table(n).astype(np.int64)
        return (z @ np.asarray(self.coeffs, dtype=np.int64)).astype(np.float64)

    def value_at(self, x: Sequence[int]) -> int:
        return sum(c * (1 - 2 * b) for c, b in zip(self.coeffs, x))


def constraint_operators(p: Problem) -> list[ConstraintOperator]:
    return [ConstraintOperator(tuple(c)) for c, _ in p.constraints.rows]


def build_cyclic_driver(p: Problem) -> list[list[tuple[int, int]]]:
    """Per constraint, the XY-chain pairs linking consecutive involved variables."""
    chains = []
    for coeffs, _ in p.constraints.rows:
        support = [i for i, c in enumerate(coeffs) if c]
        chains.append(list(zip(support, support[1:])))
    return chains


# ------------------------------------------------------------ dense oracles

_I2 = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_SIGMA = {
    1: np.array([[0, 0], [1, 0]], dtype=complex),
    0: _I2,
    -1: np.array([[0, 1], [0, 0]], dtype=complex),
}
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def _dense_guard(n: int) -> None:
    if n > DENSE_LIMIT:
        raise SizeLimitError(f"dense construction capped at {DENSE_LIMIT} qubits, got {n}")


def _kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops)


def dense_driver(u: Sequence[int]) -> np.ndarray:
    """Sigma-product form ``prod sigma^{u_i} + prod sigma^{-u_i}`` as a dense matrix."""
    _dense_guard(len(u))
    return _kron_all([_SIGMA[e] for e in u]) + _kron_all([_SIGMA[-e] for e in u])


def dense_constraint_operator(coeffs: Sequence[int]) -> np.ndarray:
    n = len(coeffs)
    _dense_guard(n)
    out = np.zeros((2**n, 2**n), dtype=complex)
    for i, c in enumerate(coeffs):
        if c:
            out += c * _kron_all([_Z if k == i else _I2 for k in range(n)])
    return out


def dense_xy_chain(pairs: Sequence[tuple[int, int]], n: int) -> np.ndarray:
    _dense_guard(n)
    out = np.zeros((2**n, 2**n), dtype=complex)
    for a, b in pairs:
        for P in (_X, _Y):
            out += _kron_all([P if k in (a, b) else _I2 for k in range(n)])
    return out


def commutator_norm(term: DriverTerm, op: ConstraintOperator, n: int | None = None) -> float:
    """Largest entry magnitude of ``C H - H C`` from dense matrices."""
    n = len(term.u) if n is None else n
    if len(term.u) != n or len(op.coeffs) != n:
        raise ValueError("operator sizes disagree")
    h = dense_driver(term.u)
    # C is diagonal, so C H and H C are row and column scalings of H
    d = op.diagonal()
    return float(np.max(np.abs(d[:, None] * h - h * d[None, :])))

