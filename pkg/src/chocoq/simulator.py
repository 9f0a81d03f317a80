"""Dense statevector simulation with an analytic fast path for driver terms.

Amplitudes are complex128, qubit 0 is the most significant index bit.  Gates act on
a ``[2] * n`` view of the amplitude array, so each application is a handful of
vectorised numpy slice operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .circuit import CX, H, MCP, OBJ, RX, RZ, XY, X, Circuit, DriverBlock, Gate, ParameterVector
from .hamiltonian import DriverTerm, SizeLimitError, dense_xy_chain, index_of, max_qubits

NORM_TOL = 1e-10
_SQRT1_2 = 1 / np.sqrt(2)


class NormDriftError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Statevector:
    n: int
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def support(self, tol: float = 1e-8) -> np.ndarray:
        """Indices whose amplitude magnitude exceeds ``tol``."""
        return np.flatnonzero(np.abs(self.amps) > tol)


@dataclass(frozen=True)
class SampleSet:
    counts: Mapping[str, int]
    shots: int


def prepare_basis_state(n: int, bits: Sequence[int]) -> Statevector:
    if len(bits) != n:
        raise ValueError(f"expected {n} bits, got {len(bits)}")
    if n > max_qubits():
        raise SizeLimitError(f"{n} qubits exceeds the simulator limit of {max_qubits()}")
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[index_of(bits)] = 1.0
    return Statevector(n, amps)


def _axis_index(n: int, fixed: Mapping[int, int]) -> tuple:
    idx = [slice(None)] * n
    for q, b in fixed.items():
        idx[q] = b
    return tuple(idx)


@lru_cache(maxsize=64)
def _xy_eigen(k: int) -> tuple[np.ndarray, np.ndarray]:
    h = dense_xy_chain([(i, i + 1) for i in range(k - 1)], k)
    w, v = np.linalg.eigh(h)
    return w, v


def _apply_1q(t: np.ndarray, q: int, m: np.ndarray) -> None:
    a0 = t[_axis_index(t.ndim, {q: 0})].copy()
    a1 = t[_axis_index(t.ndim, {q: 1})]
    t[_axis_index(t.ndim, {q: 0})] = m[0, 0] * a0 + m[0, 1] * a1
    t[_axis_index(t.ndim, {q: 1})] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_inplace(t: np.ndarray, g: Gate, params: ParameterVector | None) -> None:
    n = t.ndim
    for q in g.qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    kind = g.kind
    if kind == X:
        q = g.qubits[0]
        i0, i1 = _axis_index(n, {q: 0}), _axis_index(n, {q: 1})
        tmp = t[i0].copy()
        t[i0] = t[i1]
        t[i1] = tmp
    elif kind == H:
        _apply_1q(t, g.qubits[0], np.array([[1, 1], [1, -1]]) * _SQRT1_2)
    elif kind == CX:
        c, q = g.qubits
        i0, i1 = _axis_index(n, {c: 1, q: 0}), _axis_index(n, {c: 1, q: 1})
        tmp = t[i0].copy()
        t[i0] = t[i1]
        t[i1] = tmp
    elif kind == RZ:
        th = g.resolve(params)
        _apply_1q(t, g.qubits[0], np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]))
    elif kind == RX:
        th = g.resolve(params)
        c, s = np.cos(th / 2), np.sin(th / 2)
        _apply_1q(t, g.qubits[0], np.array([[c, -1j * s], [-1j * s, c]]))
    elif kind == MCP:
        t[_axis_index(n, {q: 1 for q in g.qubits})] *= np.exp(1j * g.resolve(params))
    elif kind == OBJ:
        if g.diag is None:
            raise ValueError("OBJ gate has no diagonal attached")
        flat = t.reshape(-1)
        flat *= np.exp(-1j * g.resolve(params) * g.diag.values)
    elif kind == XY:
        k = len(g.qubits)
        w, v = _xy_eigen(k)
        u = (v * np.exp(-1j * g.resolve(params) * w)) @ v.conj().T
        moved = np.moveaxis(t, g.qubits, range(k))
        shape = moved.shape
        out = (u @ moved.reshape(2**k, -1)).reshape(shape)
        t[...] = np.moveaxis(out, range(k), g.qubits)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")


def apply_gate(sv: Statevector, g: Gate, params: ParameterVector | None = None) -> Statevector:
    t = sv.amps.copy().reshape([2] * sv.n)
    _apply_inplace(t, g, params)
    return Statevector(sv.n, t.reshape(-1))


def _fastpath_inplace(t: np.ndarray, term: DriverTerm, beta: float) -> None:
    if len(term.u) != t.ndim:
        raise ValueError("driver term size does not match the state")
    iv = _axis_index(t.ndim, dict(zip(term.support, term.v)))
    ivb = _axis_index(t.ndim, dict(zip(term.support, term.vbar)))
    c, s = np.cos(beta), np.sin(beta)
    a = t[iv].copy()
    b = t[ivb]
    t[iv] = c * a - 1j * s * b
    t[ivb] = -1j * s * a + c * b


def apply_driver_fastpath(sv: Statevector, term: DriverTerm, beta: float) -> Statevector:
    """``exp(-i beta H_c(u))``: a 2x2 rotation on each (v, vbar) amplitude pair."""
    t = sv.amps.copy().reshape([2] * sv.n)
    _fastpath_inplace(t, term, beta)
    return Statevector(sv.n, t.reshape(-1))


def expectation_diagonal(sv: Statevector, diag) -> float:
    d = np.asarray(getattr(diag, "values", diag), dtype=np.float64)
    if d.shape != sv.amps.shape:
        raise ValueError("diagonal length does not match the state")
    return float(np.dot(sv.probabilities(), d))


def sample(sv: Statevector, shots: int, seed: int) -> SampleSet:
    """Multinomial draw over basis states using numpy's Philox generator."""
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    p = sv.probabilities()
    p = p / p.sum()
    draws = rng.multinomial(shots, p)
    counts = {
        format(int(i), f"0{sv.n}b"): int(draws[i]) for i in np.flatnonzero(draws)
    }
    return SampleSet(counts, shots)


def simulate(
    c: Circuit,
    params: ParameterVector | None,
    init: Statevector | None = None,
    use_fastpath: bool = True,
    check_norm: bool = False,
) -> Statevector:
    """Apply the circuit to ``init`` (default ``|0..0>``).

    With ``use_fastpath`` driver blocks run analytically; otherwise their gate
    decomposition is applied gate by gate.  ``check_norm`` raises on any per-gate
    norm drift above 1e-10 instead of renormalising.
    """
    if init is None:
        init = prepare_basis_state(c.num_qubits, [0] * c.num_qubits)
    if init.n != c.num_qubits:
        raise ValueError("initial state size does not match the circuit")
    t = init.amps.astype(np.complex128, copy=True).reshape([2] * c.num_qubits)
    norm = float(np.vdot(t, t).real)

    def check():
        nonlocal norm
        now = float(np.vdot(t, t).real)
        if not abs(now - norm) <= NORM_TOL:  # also catches NaN
            raise NormDriftError(f"norm drifted from {norm!r} to {now!r}")
        norm = now

    for op in c.ops:
        if isinstance(op, DriverBlock):
            if use_fastpath:
                if params is None:
                    raise ValueError(f"unbound parameter slot ('beta', {op.layer})")
                _fastpath_inplace(t, op.term, params.value(("beta", op.layer)))
                if check_norm:
                    check()
            else:
                for g in op.gates:
                    _apply_inplace(t, g, params)
                    if check_norm:
                        check()
        else:
            _apply_inplace(t, op, params)
            if check_norm:
                check()
    return Statevector(c.num_qubits, t.reshape(-1))
