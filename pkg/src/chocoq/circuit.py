"""Gate-level circuits for the commuting-driver QAOA and the two baselines.

Gate kinds::

    H, X          single-qubit Cliffords
    CX            (control, target)
    RZ, RX        single-qubit rotations, RX(t) = exp(-i t X / 2)
    MCP           phase e^{i angle} on the all-ones state of its operands
    OBJ           exp(-i gamma * d) for a stored diagonal d over all qubits
    XY            exp(-i angle * sum (X_a X_b + Y_a Y_b)) over consecutive operands

Qubit ``i`` carries variable ``x_{i+1}``; all indices here are 0-based.

A driver term ``exp(-i beta H_c(u))`` is emitted as a :class:`DriverBlock` so the
simulator may run it analytically; its ``gates`` hold the exact decomposition
``G, X(q1), MCP(-beta), X(q1), MCP(beta), G^dagger``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .hamiltonian import DriverTerm, ObjectiveDiagonal
from .problem import Problem, check_feasible

H, X, CX, RZ, RX, MCP, OBJ, XY = "H", "X", "CX", "RZ", "RX", "MCP", "OBJ", "XY"
PARAMETRIC = (RZ, RX, MCP, OBJ, XY)

# depth charged to an MCP gate with k controls in estimated-basic mode: a*k + b
MCP_COST_PER_CONTROL = 16
MCP_COST_OFFSET = 4


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    # (name, layer) slot in a ParameterVector; the angle is then scale * value
    param: tuple[str, int] | None = None
    scale: float = 1.0
    diag: ObjectiveDiagonal | None = field(default=None, compare=False, repr=False)
    cost: int = field(default=1, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind} gate: {self.qubits}")
        if self.kind in PARAMETRIC and self.angle is None and self.param is None:
            raise ValueError(f"{self.kind} gate needs an angle or a parameter slot")

    def resolve(self, params: ParameterVector | None) -> float:
        if self.param is None:
            return float(self.angle) if self.angle is not None else 0.0
        if params is None:
            raise ValueError(f"unbound parameter slot {self.param}")
        return self.scale * params.value(self.param)

    def adjoint(self) -> Gate:
        if self.kind in (H, X, CX):
            return self
        if self.param is not None:
            return Gate(self.kind, self.qubits, param=self.param, scale=-self.scale,
                        diag=self.diag, cost=self.cost)
        return Gate(self.kind, self.qubits, angle=-self.angle, diag=self.diag, cost=self.cost)


@dataclass(frozen=True)
class ParameterVector:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have the same length")

    @property
    def layers(self) -> int:
        return len(self.gammas)

    def value(self, slot: tuple[str, int]) -> float:
        name, layer = slot
        seq = self.gammas if name == "gamma" else self.betas if name == "beta" else None
        if seq is None or not 0 <= layer < len(seq):
            raise ValueError(f"unbound parameter slot {slot}")
        return float(seq[layer])

    def flat(self) -> list[float]:
        """Interleaved ``[gamma_1, beta_1, ..., gamma_L, beta_L]``."""
        return [v for pair in zip(self.gammas, self.betas) for v in pair]

    @classmethod
    def from_flat(cls, theta: Sequence[float]) -> ParameterVector:
        if len(theta) % 2:
            raise ValueError("parameter vector length must be even")
        return cls(tuple(float(t) for t in theta[0::2]), tuple(float(t) for t in theta[1::2]))


@dataclass(frozen=True)
class DriverBlock:
    term: DriverTerm
    layer: int
    gates: tuple[Gate, ...]


Op = Union[Gate, DriverBlock]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[Op, ...]
    layers: int = 0

    @property
    def gates(self) -> list[Gate]:
        out: list[Gate] = []
        for op in self.ops:
            out.extend(op.gates if isinstance(op, DriverBlock) else (op,))
        return out

    @property
    def num_params(self) -> int:
        return 2 * self.layers

    def slots(self) -> set[tuple[str, int]]:
        return {g.param for g in self.gates if g.param is not None}


def adjoint(gates: Iterable[Gate]) -> list[Gate]:
    return [g.adjoint() for g in reversed(list(gates))]


def build_g_gates(term: DriverTerm) -> list[Gate]:
    """Basis change taking ``(|v> + |vbar>)/sqrt2`` to ``|01..1>`` and ``(|v> - |vbar>)/sqrt2``
    to ``|11..1>`` on the support (up to a sign on the second)."""
    q, v = term.support, term.v
    gates = []
    for i in range(len(q) - 1, 0, -1):
        gates.append(Gate(CX, (q[i - 1], q[i])))
        if v[i] == v[i - 1]:
            gates.append(Gate(X, (q[i],)))
    gates.append(Gate(H, (q[0],)))
    return gates


def build_driver_block(term: DriverTerm, layer: int = 0) -> DriverBlock:
    q = term.support
    g = build_g_gates(term)
    beta = ("beta", layer)
    middle = [
        Gate(X, (q[0],)),
        Gate(MCP, q, param=beta, scale=-1.0),
        Gate(X, (q[0],)),
        Gate(MCP, q, param=beta, scale=1.0),
    ]
    return DriverBlock(term, layer, tuple(g + middle + adjoint(g)))


def _objective_cost(diag: ObjectiveDiagonal) -> int:
    # RZ layer for the linear part, CX-RZ-CX per quadratic term
    return max(1, (1 if diag.num_linear else 0) + 3 * diag.num_quadratic)


def _obj_gate(n: int, diag: ObjectiveDiagonal, layer: int) -> Gate:
    return Gate(OBJ, tuple(range(n)), param=("gamma", layer), diag=diag, cost=_objective_cost(diag))


def _prep(bits: Sequence[int]) -> list[Gate]:
    return [Gate(X, (i,)) for i, b in enumerate(bits) if b]


def assemble_chocoq_circuit(
    p: Problem,
    diag: ObjectiveDiagonal,
    terms: Sequence[DriverTerm],
    layers: int,
    x_star: Sequence[int],
) -> Circuit:
    if not check_feasible(p, x_star):
        raise ValueError("initial assignment does not satisfy the constraints")
    n = p.num_vars
    ops: list[Op] = list(_prep(x_star))
    for layer in range(layers):
        ops.append(_obj_gate(n, diag, layer))
        ops.extend(build_driver_block(t, layer) for t in terms)
    return Circuit(n, tuple(ops), layers)


def assemble_penalty_circuit(n: int, diag: ObjectiveDiagonal, layers: int) -> Circuit:
    ops: list[Op] = [Gate(H, (i,)) for i in range(n)]
    for layer in range(layers):
        ops.append(_obj_gate(n, diag, layer))
        ops.extend(Gate(RX, (i,), param=("beta", layer), scale=2.0) for i in range(n))
    return Circuit(n, tuple(ops), layers)


def assemble_cyclic_circuit(
    n: int,
    diag: ObjectiveDiagonal,
    chains: Sequence[Sequence[tuple[int, int]]],
    layers: int,
    x_star: Sequence[int],
) -> Circuit:
    ops: list[Op] = list(_prep(x_star))
    for layer in range(layers):
        ops.append(_obj_gate(n, diag, layer))
        for pairs in chains:
            if not pairs:
                continue
            qubits = (pairs[0][0],) + tuple(b for _, b in pairs)
            ops.append(Gate(XY, qubits, param=("beta", layer), cost=3 * len(pairs)))
    return Circuit(n, tuple(ops), layers)


def gate_cost(g: Gate, mode: str, a: int = MCP_COST_PER_CONTROL, b: int = MCP_COST_OFFSET) -> int:
    if mode == "logical":
        return 1
    if mode != "estimated":
        raise ValueError(f"unknown depth mode {mode!r}")
    if g.kind == MCP:
        controls = len(g.qubits) - 1
        return a * controls + b if controls else 1
    if g.kind in (OBJ, XY):
        return g.cost
    return 1


def depth_and_counts(
    c: Circuit, mode: str = "logical", a: int = MCP_COST_PER_CONTROL, b: int = MCP_COST_OFFSET
) -> tuple[int, dict[str, int]]:
    """ASAP-layered depth and per-kind gate counts."""
    level = [0] * c.num_qubits
    counts: dict[str, int] = {}
    for g in c.gates:
        start = max(level[q] for q in g.qubits)
        end = start + gate_cost(g, mode, a, b)
        for q in g.qubits:
            level[q] = end
        counts[g.kind] = counts.get(g.kind, 0) + 1
    return max(level, default=0), dict(sorted(counts.items()))


# ---------------------------------------------------------------- text export

_QASM_NAMES = {H: "h", X: "x", CX: "cx", RZ: "rz", RX: "rx"}
_MACRO_NAMES = {MCP: "mcp", OBJ: "objphase", XY: "xychain"}


def _qargs(qubits: Sequence[int]) -> str:
    return ",".join(f"q[{q}]" for q in qubits)


def export_circuit(c: Circuit, params: ParameterVector | None = None) -> str:
    """OpenQASM 2 text; MCP, OBJ and XY gates become ``//`` macro lines."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    for g in c.gates:
        if g.kind in _QASM_NAMES:
            name = _QASM_NAMES[g.kind]
            if g.kind in PARAMETRIC:
                name += f"({g.resolve(params)!r})"
            lines.append(f"{name} {_qargs(g.qubits)};")
        else:
            lines.append(f"// {_MACRO_NAMES[g.kind]}({g.resolve(params)!r}) {_qargs(g.qubits)};")
    return "\n".join(lines) + "\n"


_LINE = re.compile(r"^(?://\s*)?([a-z]+)(?:\(([^)]*)\))?\s+(q\[\d+\](?:,q\[\d+\])*);$")
_KINDS = {v: k for k, v in {**_QASM_NAMES, **_MACRO_NAMES}.items()}


def parse_circuit(text: str) -> tuple[int, list[Gate]]:
    """Inverse of :func:`export_circuit`: qubit count and gates with bound angles.

    OBJ gates come back without their diagonal, which the text does not carry.
    """
    num_qubits = None
    gates = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = re.match(r"^qreg q\[(\d+)\];$", line)
        if m:
            num_qubits = int(m.group(1))
            continue
        m = _LINE.match(line)
        if not m or m.group(1) not in _KINDS:
            raise ValueError(f"cannot parse line: {raw!r}")
        kind = _KINDS[m.group(1)]
        qubits = tuple(int(t) for t in re.findall(r"q\[(\d+)\]", m.group(3)))
        angle = float(m.group(2)) if m.group(2) is not None else None
        gates.append(Gate(kind, qubits, angle=angle))
    if num_qubits is None:
        raise ValueError("missing qreg declaration")
    return num_qubits, gates
