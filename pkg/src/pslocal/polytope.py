"""Local-polytope machinery: vertex enumeration, exact membership with
certificates, facet enumeration, and the post-selected membership oracle.

Vertices of a local polytope are deterministic strategy pairs; membership
is decided by an exact phase-1 simplex over the vertex list, returning
either an explicit convex combination or a separating inequality (Farkas
dual).  Facet enumeration goes through the double description method.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .core import CGVector, JointTable, Scenario, Efficiencies, lift, to_cg
from .dd import facets_of_polytope
from .errors import DimensionMismatch, SizeLimit
from .inequalities import Inequality, _cg_basis_tables, inequality_from_key
from .linprog import (
    INFEASIBLE,
    OPTIMAL,
    maximize_over_hrep,
    solve_equality_form,
)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Vertex:
    """A deterministic local strategy pair: one outcome per input per side."""

    scenario: Scenario
    strategy_A: tuple
    strategy_B: tuple

    def table(self) -> JointTable:
        s = self.scenario
        entries = [
            [
                [
                    [
                        ONE
                        if (a == self.strategy_A[x] and b == self.strategy_B[y])
                        else ZERO
                        for b in range(s.kB)
                    ]
                    for a in range(s.kA)
                ]
                for y in range(s.mB)
            ]
            for x in range(s.mA)
        ]
        return JointTable(s, entries)

    def cg(self) -> CGVector:
        return to_cg(self.table())


def enumerate_vertices(s: Scenario, cap: int = 10 ** 6) -> List[Vertex]:
    """All deterministic strategy pairs, in deterministic order."""
    count = s.kA ** s.mA * s.kB ** s.mB
    if count > cap:
        raise SizeLimit(f"{count} vertices exceed the cap of {cap}")
    vertices = []
    for strat_A in itertools.product(range(s.kA), repeat=s.mA):
        for strat_B in itertools.product(range(s.kB), repeat=s.mB):
            vertices.append(Vertex(s, strat_A, strat_B))
    return vertices


def affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    """Exact affine rank (dimension of the affine hull) of a point set."""
    points = [tuple(p) for p in points]
    if not points:
        return -1
    origin = points[0]
    reduced: List[list] = []
    pivots: List[int] = []
    for p in points[1:]:
        vec = [Fraction(a) - Fraction(o) for a, o in zip(p, origin)]
        for prow, pcol in zip(reduced, pivots):
            factor = vec[pcol]
            if factor:
                vec = [a - factor * b for a, b in zip(vec, prow)]
        pivot = next((j for j, v in enumerate(vec) if v), -1)
        if pivot < 0:
            continue
        inv = ONE / vec[pivot]
        reduced.append([v * inv for v in vec])
        pivots.append(pivot)
    return len(reduced)


@dataclass
class PolytopeRep:
    """A polytope with a V- and/or H-representation over one scenario."""

    scenario: Scenario
    vertices: Optional[List[CGVector]] = None
    facets: Optional[List[Inequality]] = None
    _dim: Optional[int] = None

    @property
    def dim(self) -> int:
        if self._dim is None:
            if self.vertices is None:
                raise ValueError("dimension unknown without vertices")
            self._dim = affine_rank([v.coords for v in self.vertices])
        return self._dim

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario.to_dict()}
        if self.vertices is not None:
            out["vertices"] = [[str(c) for c in v.coords] for v in self.vertices]
        if self.facets is not None:
            out["facets"] = [f.to_dict() for f in self.facets]
        return out


@lru_cache(maxsize=None)
def local_polytope(s: Scenario) -> PolytopeRep:
    """V-representation of the local polytope of a scenario."""
    return PolytopeRep(s, vertices=[v.cg() for v in enumerate_vertices(s)])


@dataclass(frozen=True)
class MembershipCertificate:
    """Self-validating result of an exact membership test.

    Inside: ``weights`` is a convex combination over the polytope's
    vertices reconstructing the query exactly.  Outside: ``separator``
    evaluates <= its bound on every vertex and strictly above it on the
    query.
    """

    inside: bool
    weights: Optional[tuple] = None
    separator: Optional[Inequality] = None


def membership(q: CGVector, poly: PolytopeRep) -> MembershipCertificate:
    """Exact LP test for q in conv(vertices of poly)."""
    if poly.vertices is None:
        raise ValueError("membership requires a V-representation")
    if q.scenario != poly.scenario:
        raise DimensionMismatch("query and polytope over different scenarios")
    verts = poly.vertices
    dim = len(q.coords)
    A = [[v.coords[i] for v in verts] for i in range(dim)]
    A.append([ONE] * len(verts))
    b = list(q.coords) + [ONE]
    result = solve_equality_form(A, b, [ZERO] * len(verts))
    if result.status == OPTIMAL:
        weights = tuple(result.x)
        # Self-check: exact reconstruction.
        assert sum(weights) == 1
        for i in range(dim):
            assert sum(w * v.coords[i] for w, v in zip(weights, verts)) == q.coords[i]
        return MembershipCertificate(inside=True, weights=weights)
    assert result.status == INFEASIBLE
    y = result.farkas
    separator = Inequality(
        poly.scenario, tuple(y[:dim]), offset=y[dim], bound=ZERO, relation="<="
    )
    for v in verts:
        assert separator.evaluate(v) <= 0
    assert separator.evaluate(q) > 0
    return MembershipCertificate(inside=False, separator=separator)


def is_ps_local(pps: JointTable, eff: Efficiencies) -> MembershipCertificate:
    """Can pps be explained by a local a-priori model with these
    efficiencies?  Tests membership of the lifted table in the local
    a-priori polytope; the certificate lives in its coordinates."""
    p0 = lift(pps, eff)
    return membership(to_cg(p0), local_polytope(p0.scenario))


def _facet_cache_path(poly: PolytopeRep) -> Optional[str]:
    cache_dir = os.environ.get("PSLOCAL_CACHE_DIR")
    if not cache_dir:
        return None
    digest = hashlib.sha256(
        json.dumps(
            [[str(c) for c in v.coords] for v in poly.vertices], sort_keys=True
        ).encode()
    ).hexdigest()[:24]
    return os.path.join(cache_dir, f"facets-{digest}.json")


def enumerate_facets(
    poly: PolytopeRep, budget_seconds: Optional[float] = None
) -> List[Inequality]:
    """Complete irredundant H-representation via double description.

    Output is canonically scaled (coprime integers, relation '<=') and
    deterministically ordered, independent of vertex input order.  Results
    are memoized in PSLOCAL_CACHE_DIR when that variable is set.
    """
    if poly.vertices is None:
        raise ValueError("facet enumeration requires a V-representation")
    if poly.dim != poly.scenario.cg_dim:
        raise ValueError("facet enumeration requires a full-dimensional polytope")
    cache_path = _facet_cache_path(poly)
    if cache_path and os.path.exists(cache_path):
        with open(cache_path) as fh:
            keys = json.load(fh)
        facets = [
            inequality_from_key(poly.scenario, tuple(k)) for k in keys
        ]
        poly.facets = facets
        return facets
    deadline = time.time() + budget_seconds if budget_seconds else None
    raw = facets_of_polytope([v.coords for v in poly.vertices], deadline=deadline)
    facets = [
        inequality_from_key(poly.scenario, coeffs + (rhs,)) for coeffs, rhs in raw
    ]
    if cache_path:
        os.makedirs(os.path.dirname(cache_path) or ".", exist_ok=True)
        with open(cache_path, "w") as fh:
            json.dump([list(f.key()) for f in facets], fh)
    poly.facets = facets
    return facets


def verify_facet(ineq: Inequality, poly: PolytopeRep) -> dict:
    """Check validity and facet-ness of an inequality against a V-rep.

    Returns {"valid", "tight_rank", "is_facet"}: valid iff every vertex
    satisfies it, tight_rank counts affinely independent saturating
    vertices, and is_facet iff the inequality is valid and the saturating
    set spans an affine subspace of dimension poly.dim - 1 (that is,
    tight_rank == poly.dim).
    """
    if poly.vertices is None:
        raise ValueError("verify_facet requires a V-representation")
    valid = True
    tight = []
    for v in poly.vertices:
        slack = ineq.slack(v)
        if slack < 0:
            valid = False
        elif slack == 0:
            tight.append(v.coords)
    rank = affine_rank(tight) if tight else -1
    tight_count = rank + 1  # affinely independent points spanning the tight set
    is_facet = valid and tight_count == poly.dim
    return {"valid": valid, "tight_rank": tight_count, "is_facet": is_facet}


def ns_hrep(s: Scenario) -> PolytopeRep:
    """H-representation of the non-signaling polytope in CG coordinates:
    positivity of every reconstructed probability."""
    t0, basis = _cg_basis_tables(s)
    facets = []
    n = len(t0)
    for i in range(n):
        coeffs = tuple(Fraction(-bj[i]) for bj in basis)
        facets.append(
            Inequality(s, coeffs, offset=ZERO, bound=Fraction(t0[i]), relation="<=")
        )
    # Deduplicate (entries fixed to zero by the scenario would repeat).
    seen = {}
    for f in facets:
        seen.setdefault(f.key(), f)
    ordered = [seen[k] for k in sorted(seen)]
    return PolytopeRep(s, facets=ordered, _dim=s.cg_dim)


def lp_max(ineq: Inequality, hrep: PolytopeRep) -> Fraction:
    """Exact maximum of the inequality's left-hand side over an H-polytope."""
    if hrep.facets is None:
        raise ValueError("lp_max requires an H-representation")
    rows = []
    rhs = []
    for f in hrep.facets:
        key = f.key()
        rows.append([Fraction(c) for c in key[:-1]])
        rhs.append(Fraction(key[-1]))
    return ineq.offset + maximize_over_hrep(rows, rhs, ineq.coeffs)


def is_trivial_for_ns(ineq: Inequality) -> bool:
    """True when the inequality cannot be violated by any non-signaling
    correlation (its LHS maximum over the NS polytope respects the bound)."""
    if ineq.relation != "<=":
        ineq = ineq.canonical_scaled()
    return lp_max(ineq, ns_hrep(ineq.scenario)) <= ineq.bound
