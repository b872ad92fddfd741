from fractions import Fraction

import pytest

from pslocal.errors import Infeasible, Unbounded
from pslocal.linprog import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    maximize_over_hrep,
    solve_equality_form,
)

F = Fraction


def test_simple_optimum():
    # min -x1 - x2  s.t.  x1 + x2 + s = 1  ->  optimum -1 on the segment.
    res = solve_equality_form([[1, 1, 1]], [1], [-1, -1, 0])
    assert res.status == OPTIMAL
    assert res.objective == F(-1)
    assert sum(res.x[:2]) == F(1)
    assert all(v >= 0 for v in res.x)


def test_degenerate_vertex_terminates():
    # Multiple constraints active at the optimum; Bland's rule must not cycle.
    A = [
        [1, 0, 1, 0, 0],
        [0, 1, 0, 1, 0],
        [1, 1, 0, 0, 1],
    ]
    res = solve_equality_form(A, [1, 1, 2], [-1, -1, 0, 0, 0])
    assert res.status == OPTIMAL
    assert res.objective == F(-2)


def test_infeasible_gives_farkas_certificate():
    # x1 = 1 and x1 = 2 cannot hold together; the Farkas vector y must
    # satisfy y.A <= 0 columnwise with y.b > 0.
    A = [[1, 0], [1, 0]]
    b = [F(1), F(2)]
    res = solve_equality_form(A, b, [0, 0])
    assert res.status == INFEASIBLE
    y = res.farkas
    for j in range(2):
        assert sum(y[i] * A[i][j] for i in range(2)) <= 0
    assert sum(yi * bi for yi, bi in zip(y, b)) > 0


def test_unbounded_detected():
    # min -x1 with x1 - x2 = 0: push both variables to infinity.
    res = solve_equality_form([[1, -1]], [0], [-1, 0])
    assert res.status == UNBOUNDED


def test_dual_certifies_optimum():
    A = [[2, 1, 1, 0], [1, 3, 0, 1]]
    b = [F(4), F(6)]
    c = [F(-3), F(-5), F(0), F(0)]
    res = solve_equality_form(A, b, c)
    assert res.status == OPTIMAL
    # Strong duality: y.b equals the optimum and A^T y <= c.
    assert sum(yi * bi for yi, bi in zip(res.dual, b)) == res.objective
    for j in range(4):
        assert sum(res.dual[i] * A[i][j] for i in range(2)) <= c[j]


def test_maximize_over_square():
    rows = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    rhs = [1, 1, 1, 1]
    assert maximize_over_hrep(rows, rhs, [1, 1]) == F(2)
    assert maximize_over_hrep(rows, rhs, [F(1, 3), F(-2, 5)]) == F(11, 15)


def test_maximize_reports_empty_and_unbounded():
    with pytest.raises(Infeasible):
        maximize_over_hrep([[1], [-1]], [F(-1), F(-1)], [1])
    with pytest.raises(Unbounded):
        maximize_over_hrep([[1, 0]], [1], [0, 1])
