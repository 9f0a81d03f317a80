"""Kronecker-product gate matrices, independent of the package simulator."""
from __future__ import annotations

from functools import reduce

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]])
PZ = np.diag([1.0, -1.0]).astype(complex)
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def embed(n, ops):
    """Tensor product with ``ops[q]`` on qubit q (qubit 0 leftmost) and identity elsewhere."""
    return reduce(np.kron, [ops.get(q, I2) for q in range(n)])


def gate_matrix(n, kind, qubits, angle=None):
    if kind == "X":
        return embed(n, {qubits[0]: PX})
    if kind == "H":
        return embed(n, {qubits[0]: HAD})
    if kind == "CX":
        c, t = qubits
        return embed(n, {c: P0}) + embed(n, {c: P1, t: PX})
    if kind == "RZ":
        return expm(-0.5j * angle * embed(n, {qubits[0]: PZ}))
    if kind == "RX":
        return expm(-0.5j * angle * embed(n, {qubits[0]: PX}))
    if kind == "MCP":
        proj = embed(n, {q: P1 for q in qubits})
        return np.eye(2**n) + (np.exp(1j * angle) - 1) * proj
    raise ValueError(kind)


def circuit_matrix(n, gates, params=None):
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_matrix(n, g.kind, g.qubits, g.resolve(params) if g.kind in ("RZ", "RX", "MCP") else None) @ u
    return u


def phase_distance(a, b):
    """Max-entry distance between a and b after removing a global phase."""
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[k] / b[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))
