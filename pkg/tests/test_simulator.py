from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from chocoq.circuit import MCP, Circuit, Gate, ParameterVector, assemble_chocoq_circuit, build_driver_block
from chocoq.hamiltonian import DriverTerm, build_driver_terms, build_objective_diagonal, dense_driver, index_of
from chocoq.nullspace import solve_basis
from chocoq.simulator import (
    NormDriftError,
    Statevector,
    apply_driver_fastpath,
    apply_gate,
    expectation_diagonal,
    prepare_basis_state,
    sample,
    simulate,
)

from dense import gate_matrix


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(n, a / np.linalg.norm(a))


def test_basis_state_index():
    sv = prepare_basis_state(4, (1, 0, 1, 0))
    assert sv.support().tolist() == [10]
    with pytest.raises(ValueError):
        prepare_basis_state(3, (1, 0))


@pytest.mark.parametrize("kind,qubits,angle", [
    ("X", (1,), None), ("H", (2,), None), ("CX", (0, 2), None), ("CX", (2, 0), None),
    ("RZ", (1,), 0.7), ("RX", (0,), -1.3), ("MCP", (0, 2), 0.9),
])
def test_gates_match_kron_matrices(kind, qubits, angle):
    sv = random_state(3, 1)
    out = apply_gate(sv, Gate(kind, qubits, angle=angle))
    assert np.allclose(out.amps, gate_matrix(3, kind, qubits, angle) @ sv.amps, atol=1e-12)


def test_hadamard_on_zero():
    out = apply_gate(prepare_basis_state(1, (0,)), Gate("H", (0,)))
    assert np.allclose(out.amps, [2**-0.5, 2**-0.5])


@pytest.mark.parametrize("k", range(1, 7))
def test_mcp_phases_only_all_ones(k):
    n = k + 1
    g = Gate(MCP, tuple(range(1, n)), angle=0.6)
    for bits in itertools.product((0, 1), repeat=n):
        out = apply_gate(prepare_basis_state(n, bits), g)
        expected = np.exp(0.6j) if all(bits[1:]) else 1
        assert out.amps[index_of(bits)] == pytest.approx(expected)
        assert out.support().tolist() == [index_of(bits)]


def test_qubit_out_of_range():
    with pytest.raises(IndexError):
        apply_gate(prepare_basis_state(2, (0, 0)), Gate("X", (2,)))


# ------------------------------------------------------------------ fast path


def test_fastpath_quarter_turn():
    t = DriverTerm((-1, 1, -1))
    out = apply_driver_fastpath(prepare_basis_state(3, (0, 1, 0)), t, np.pi / 2)
    assert out.amps[index_of((1, 0, 1))] == pytest.approx(-1j)
    assert abs(out.amps[index_of((0, 1, 0))]) < 1e-15
    still = apply_driver_fastpath(prepare_basis_state(3, (0, 0, 0)), t, 0.8)
    assert still.amps[0] == 1


@given(st.lists(st.sampled_from((-1, 0, 1)), min_size=1, max_size=6).filter(any),
       st.floats(-np.pi, np.pi), st.integers(0, 2**16))
def test_fastpath_equals_dense_exponential(u, beta, seed):
    n = len(u)
    sv = random_state(n, seed)
    expected = expm(-1j * beta * dense_driver(u)) @ sv.amps
    assert np.allclose(apply_driver_fastpath(sv, DriverTerm(tuple(u)), beta).amps, expected, atol=1e-12)


def test_fastpath_matches_gate_path_on_p0(p0):
    terms = build_driver_terms(solve_basis(p0.constraints, 4))
    c = assemble_chocoq_circuit(p0, build_objective_diagonal(p0), terms, 3, (0, 1, 0, 0))
    rng = np.random.default_rng(7)
    for _ in range(20):
        params = ParameterVector.from_flat(rng.uniform(-np.pi, np.pi, size=6))
        fast = simulate(c, params)
        slow = simulate(c, params, use_fastpath=False, check_norm=True)
        assert abs(np.vdot(fast.amps, slow.amps)) ** 2 >= 1 - 1e-9


def test_block_matches_exponential_up_to_phase():
    t = DriverTerm((1, 0, -1, 1))
    block = Circuit(4, (build_driver_block(t),), 1)
    sv = random_state(4, 3)
    params = ParameterVector((0.0,), (0.41,))
    slow = simulate(block, params, init=sv, use_fastpath=False)
    exact = expm(-0.41j * dense_driver(t.u)) @ sv.amps
    assert abs(np.vdot(exact, slow.amps)) == pytest.approx(1, abs=1e-12)


def test_driver_spreads_support(p0):
    terms = build_driver_terms(solve_basis(p0.constraints, 4))
    c = assemble_chocoq_circuit(p0, build_objective_diagonal(p0), terms, 1, (0, 1, 0, 0))
    out = simulate(c, ParameterVector((0.2,), (0.3,)))
    assert len(out.support()) > 1
    assert out.norm() == pytest.approx(1)


# ------------------------------------------------------- norms and sampling


def test_norm_check_raises_on_drift():
    # an unnormalised start is accepted as long as the gates keep its norm
    sv = Statevector(1, np.array([2.0, 0.0], dtype=complex))
    out = simulate(Circuit(1, (Gate("H", (0,)),)), None, init=sv, check_norm=True)
    assert out.norm() == pytest.approx(4)
    bad = Circuit(1, (Gate("RZ", (0,), angle=float("nan")),))
    with pytest.raises(NormDriftError):
        simulate(bad, None, init=prepare_basis_state(1, (1,)), check_norm=True)


def test_expectation_on_uniform_pair(p0):
    amps = np.zeros(16, dtype=complex)
    amps[index_of((1, 0, 1, 0))] = amps[index_of((0, 1, 0, 0))] = 2**-0.5
    d = build_objective_diagonal(p0)
    assert expectation_diagonal(Statevector(4, amps), d) == pytest.approx(-1)
    with pytest.raises(ValueError):
        expectation_diagonal(Statevector(4, amps), d.values[:8])


def test_sample_deterministic_and_on_support():
    sv = random_state(3, 5)
    a, b = sample(sv, 1000, 11), sample(sv, 1000, 11)
    assert a == b and sum(a.counts.values()) == 1000
    assert sample(prepare_basis_state(2, (1, 0)), 50, 0).counts == {"10": 50}
    with pytest.raises(ValueError):
        sample(sv, 0, 1)


def test_sample_statistics_within_five_sigma():
    sv = random_state(3, 9)
    shots = 20000
    counts = sample(sv, shots, 2).counts
    for i, p in enumerate(sv.probabilities()):
        got = counts.get(format(i, "03b"), 0)
        sigma = np.sqrt(shots * p * (1 - p))
        assert abs(got - shots * p) <= 5 * sigma + 1
