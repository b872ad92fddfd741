"""Exact rational linear programming with certificates.

A dense two-phase tableau simplex over `fractions.Fraction`.  Bland's rule
guarantees termination; all certificates (primal solutions, dual vectors,
Farkas infeasibility vectors) are exact.  Problems here are small (at most
a few hundred columns), so a dense tableau is the simplest reliable choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from .errors import Infeasible, Unbounded

ZERO = Fraction(0)
ONE = Fraction(1)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    """Outcome of an equality-form LP: min c.x s.t. Ax = b, x >= 0.

    ``dual`` satisfies dual.b = objective and c - dual.A >= 0 on optimality;
    ``farkas`` satisfies farkas.A <= 0 and farkas.b > 0 on infeasibility.
    """

    status: str
    x: Optional[list] = None
    objective: Optional[Fraction] = None
    dual: Optional[list] = None
    farkas: Optional[list] = None


def _pivot(tableau: List[list], basis: List[int], row: int, col: int) -> None:
    prow = tableau[row]
    pivot = prow[col]
    if pivot != 1:
        inv = ONE / pivot
        tableau[row] = prow = [v * inv for v in prow]
    for i, r in enumerate(tableau):
        if i == row:
            continue
        factor = r[col]
        if factor:
            tableau[i] = [a - factor * p for a, p in zip(r, prow)]
    basis[row] = col


def _run_simplex(tableau: List[list], basis: List[int], n_enterable: int) -> str:
    """Bland's rule: smallest-index entering column among the first
    ``n_enterable``, smallest ratio then smallest basis index leaving."""
    while True:
        cost = tableau[-1]
        col = -1
        for j in range(n_enterable):
            if cost[j] < 0:
                col = j
                break
        if col < 0:
            return OPTIMAL
        row = -1
        best = None
        for i in range(len(tableau) - 1):
            aij = tableau[i][col]
            if aij > 0:
                ratio = tableau[i][-1] / aij
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[row]
                ):
                    best = ratio
                    row = i
        if row < 0:
            return UNBOUNDED
        _pivot(tableau, basis, row, col)


def solve_equality_form(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    c: Sequence[Fraction],
) -> LPResult:
    """min c.x subject to Ax = b, x >= 0, everything exact."""
    m = len(A)
    n = len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    flipped = [False] * m
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
            flipped[i] = True

    # Tableau columns: n structural, m artificial, RHS.
    tableau = []
    for i in range(m):
        row = A[i] + [ZERO] * m + [b[i]]
        row[n + i] = ONE
        tableau.append(row)
    basis = list(range(n, n + m))

    # Phase 1: minimize the artificial sum.  The initial reduced-cost row
    # for cost (0,...,0 | 1,...,1) with the artificial basis is -sum(rows)
    # on the structural part and zero on the artificial part.
    cost = [ZERO] * (n + m + 1)
    for i in range(m):
        for j in range(n):
            cost[j] -= tableau[i][j]
        cost[-1] -= tableau[i][-1]
    tableau.append(cost)
    status = _run_simplex(tableau, basis, n)
    assert status == OPTIMAL  # bounded below by zero
    if tableau[-1][-1] < 0:
        # Phase-1 optimum positive: infeasible.  Dual of phase 1 from the
        # artificial columns' reduced costs (artificial cost was 1 there).
        y = [ONE - tableau[-1][n + j] for j in range(m)]
        farkas = [-v if flipped[j] else v for j, v in enumerate(y)]
        return LPResult(status=INFEASIBLE, farkas=farkas)

    # Drive basic artificials out where possible; rows that cannot be
    # pivoted are redundant (all-zero structural part) and stay inert.
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if tableau[i][j] != 0:
                    _pivot(tableau, basis, i, j)
                    break

    # Phase 2 cost row for the real objective (artificial cost zero).
    cost = [Fraction(v) for v in c] + [ZERO] * (m + 1)
    for i, bi in enumerate(basis):
        if bi < n and cost[bi]:
            factor = cost[bi]
            cost = [cv - factor * av for cv, av in zip(cost, tableau[i])]
    tableau[-1] = cost
    status = _run_simplex(tableau, basis, n)
    if status == UNBOUNDED:
        return LPResult(status=UNBOUNDED)

    x = [ZERO] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = tableau[i][-1]
    objective = sum(ci * xi for ci, xi in zip(c, x))
    y = [-tableau[-1][n + j] for j in range(m)]
    dual = [-v if flipped[j] else v for j, v in enumerate(y)]
    return LPResult(status=OPTIMAL, x=x, objective=objective, dual=dual)


def maximize_over_hrep(
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    objective: Sequence[Fraction],
) -> Fraction:
    """Exact max of objective.x over {x : rows.x <= rhs} (x free).

    Raises Unbounded when the polyhedron is unbounded in the objective
    direction and Infeasible when it is empty.
    """
    m = len(rows)
    d = len(objective)
    # Split free variables and add slacks: rows.(u - v) + s = rhs.
    A = []
    for i, row in enumerate(rows):
        base = [Fraction(v) for v in row]
        arow = base + [-v for v in base] + [ZERO] * m
        arow[2 * d + i] = ONE
        A.append(arow)
    c = (
        [-Fraction(v) for v in objective]
        + [Fraction(v) for v in objective]
        + [ZERO] * m
    )
    result = solve_equality_form(A, list(rhs), c)
    if result.status == UNBOUNDED:
        raise Unbounded("objective unbounded over the H-polyhedron")
    if result.status == INFEASIBLE:
        raise Infeasible("empty H-polyhedron")
    return -result.objective
