from __future__ import annotations

import itertools
import json
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chocoq.problem import (
    MAXIMIZE,
    MINIMIZE,
    ConstraintSystem,
    FeasibleNotFound,
    InfeasibleConstraint,
    Objective,
    Problem,
    bits_to_str,
    check_feasible,
    dumps_problem,
    evaluate_objective,
    find_feasible,
    iter_feasible,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    residuals,
    save_problem,
    str_to_bits,
)


def all_bits(n):
    return list(itertools.product((0, 1), repeat=n))


# ---------------------------------------------------------------- objective


def test_objective_canonicalises_and_merges_keys():
    obj = Objective(MINIMIZE, quadratic={(2, 1): 1, (1, 2): Decimal("0.5"), (3, 3): 2})
    assert obj.quadratic == {(1, 2): Decimal("1.5")}
    assert obj.linear == {3: Decimal(2)}


def test_objective_drops_zero_terms():
    obj = Objective(MINIMIZE, linear={0: 0, 1: 1}, quadratic={(0, 1): 0})
    assert obj.linear == {1: Decimal(1)}
    assert obj.quadratic == {}


def test_objective_rejects_unknown_direction():
    with pytest.raises(ValueError):
        Objective("sideways")


def test_evaluate_p0_over_all_assignments(p0):
    for x in all_bits(4):
        assert evaluate_objective(p0, x) == x[0] + x[2]
    assert evaluate_objective(p0, (1, 0, 1, 0)) == 2


def test_evaluate_zero_assignment_is_constant():
    p = Problem(3, Objective(MINIMIZE, linear={0: 3}, quadratic={(1, 2): -1}))
    assert evaluate_objective(p, (0, 0, 0)) == 0


def test_evaluate_keeps_native_direction():
    p = Problem(1, Objective(MAXIMIZE, linear={0: 5}))
    assert evaluate_objective(p, (1,)) == 5


def test_evaluate_length_mismatch(p0):
    with pytest.raises(ValueError):
        evaluate_objective(p0, (1, 0))


# -------------------------------------------------------------- constraints


def test_zero_row_with_zero_rhs_is_dropped():
    cs = ConstraintSystem.from_matrix([[0, 0], [1, 1]], [0, 1])
    assert len(cs) == 1


def test_zero_row_with_nonzero_rhs_is_rejected():
    with pytest.raises(InfeasibleConstraint):
        ConstraintSystem.from_matrix([[0, 0]], [1])


def test_problem_rejects_out_of_range_objective():
    with pytest.raises(ValueError):
        Problem(2, Objective(MINIMIZE, linear={2: 1}))


def test_problem_rejects_short_row():
    with pytest.raises(ValueError):
        Problem(3, Objective(MINIMIZE), ConstraintSystem.from_matrix([[1, 1]], [1]))


def test_default_var_names():
    assert Problem(3, Objective(MINIMIZE)).var_names == ("x1", "x2", "x3")


def test_check_feasible_p0(p0):
    assert check_feasible(p0, (1, 0, 1, 0))
    assert not check_feasible(p0, (1, 1, 0, 0))
    assert residuals(p0, (1, 1, 0, 0)) == [1, 1]


def test_unconstrained_everything_feasible():
    p = Problem(3, Objective(MINIMIZE))
    assert all(check_feasible(p, x) for x in all_bits(3))


# ------------------------------------------------------------ feasible search


def test_p0_feasible_set_matches_enumeration(p0):
    brute = [x for x in all_bits(4) if check_feasible(p0, x)]
    assert brute == [(0, 0, 0, 1), (0, 1, 0, 0), (1, 0, 1, 0)]
    assert list(iter_feasible(p0)) == brute
    assert find_feasible(p0) in brute


def test_find_feasible_impossible_sum():
    p = Problem(2, Objective(MINIMIZE), ConstraintSystem.from_matrix([[1, 1]], [3]))
    with pytest.raises(FeasibleNotFound):
        find_feasible(p)


def test_find_feasible_no_rows_gives_zeros():
    assert find_feasible(Problem(3, Objective(MINIMIZE))) == (0, 0, 0)


def test_find_feasible_budget():
    rows = [[1] * 12]
    p = Problem(12, Objective(MINIMIZE), ConstraintSystem.from_matrix(rows, [12]))
    assert find_feasible(p) == (1,) * 12
    with pytest.raises(FeasibleNotFound):
        find_feasible(p, budget=5)
    with pytest.raises(ValueError):
        find_feasible(p, budget=0)


@st.composite
def small_systems(draw):
    n = draw(st.integers(1, 7))
    m = draw(st.integers(0, 3))
    rows = [draw(st.lists(st.integers(-2, 2), min_size=n, max_size=n)) for _ in range(m)]
    rows = [r for r in rows if any(r)]
    x = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    # half the time the rhs is shifted so the system may be infeasible
    shift = draw(st.lists(st.integers(-1, 1), min_size=len(rows), max_size=len(rows)))
    rhs = [sum(a * b for a, b in zip(r, x)) + s for r, s in zip(rows, shift)]
    return Problem(n, Objective(MINIMIZE), ConstraintSystem.from_matrix(rows, rhs))


@given(small_systems())
def test_iter_feasible_equals_brute_force(p):
    brute = [x for x in all_bits(p.num_vars) if check_feasible(p, x)]
    assert list(iter_feasible(p)) == brute
    if brute:
        x = find_feasible(p)
        assert x == brute[0] and check_feasible(p, x)
    else:
        with pytest.raises(FeasibleNotFound):
            find_feasible(p)


# --------------------------------------------------------------------- JSON


def test_bitstring_helpers():
    assert bits_to_str((1, 0, 1, 0)) == "1010"
    assert str_to_bits("0110") == (0, 1, 1, 0)


def test_json_roundtrip(p0, tmp_path):
    path = tmp_path / "p.json"
    save_problem(p0, path)
    q = load_problem(path)
    assert q == p0
    doc = json.loads(path.read_text())
    assert doc["constraints"][1] == {"coeffs": [1, 1, 0, 1], "rhs": 1}
    assert all(isinstance(c, str) for _, c in doc["objective"]["linear"])


def test_json_keeps_decimal_exactness():
    p = Problem(2, Objective(MINIMIZE, constant="0.1", linear={0: "0.2"}, quadratic={(0, 1): "-0.3"}))
    q = problem_from_dict(json.loads(dumps_problem(p)))
    assert evaluate_objective(q, (1, 1)) == Decimal("0")
    assert problem_to_dict(q) == problem_to_dict(p)


def test_json_missing_num_vars():
    with pytest.raises(KeyError):
        problem_from_dict({"objective": {"direction": "minimize"}})


def test_json_rejects_fractional_constraint():
    doc = {"num_vars": 2, "constraints": [{"coeffs": [1, 0.5], "rhs": 1}]}
    with pytest.raises(ValueError):
        problem_from_dict(doc)
