"""Bell inequality catalog, threshold functions, and symmetry machinery.

An :class:`Inequality` is an affine functional in Collins-Gisin coordinates:
``value(P) = offset + coeffs . cg(P)`` compared against ``bound`` via ``<=``
or ``>=``.  Inequalities are stored scale-free: comparisons and orbit
computations go through a canonical coprime-integer key with the offset
folded into the right-hand side and the relation flipped to ``<=``.

Relabeling symmetries (input permutations, per-observable outcome
permutations, party exchange) act on inequalities through their full-table
coefficient representation; the conversion back to Collins-Gisin coordinates
is canonical on the no-signaling subspace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Sequence, Union

from .core import (
    CGVector,
    CHSH,
    Efficiencies,
    JointTable,
    Scenario,
    cg_index_joint,
    cg_index_marginal_A,
    cg_index_marginal_B,
    rational,
    to_cg,
    to_full,
)
from .errors import DimensionMismatch

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Inequality:
    """A linear inequality on the correlation space of a scenario."""

    scenario: Scenario
    coeffs: tuple
    offset: Fraction = ZERO
    bound: Fraction = ZERO
    relation: str = "<="

    def __post_init__(self) -> None:
        coeffs = tuple(rational(c) for c in self.coeffs)
        if len(coeffs) != self.scenario.cg_dim:
            raise DimensionMismatch(
                f"expected {self.scenario.cg_dim} coefficients, got {len(coeffs)}"
            )
        if self.relation not in ("<=", ">="):
            raise ValueError("relation must be '<=' or '>='")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", rational(self.offset))
        object.__setattr__(self, "bound", rational(self.bound))

    def evaluate(self, p: Union[JointTable, CGVector]) -> Fraction:
        """offset + coeffs . cg(p), exact."""
        if isinstance(p, JointTable):
            p = to_cg(p)
        if p.scenario != self.scenario:
            raise DimensionMismatch("inequality and point over different scenarios")
        return self.offset + sum(c * v for c, v in zip(self.coeffs, p.coords))

    def satisfied_by(self, p: Union[JointTable, CGVector]) -> bool:
        value = self.evaluate(p)
        return value <= self.bound if self.relation == "<=" else value >= self.bound

    def slack(self, p: Union[JointTable, CGVector]) -> Fraction:
        """bound - value for '<=', value - bound for '>=' (non-negative iff satisfied)."""
        value = self.evaluate(p)
        return self.bound - value if self.relation == "<=" else value - self.bound

    def key(self) -> tuple:
        """Canonical coprime-integer key (coeffs..., rhs) with relation '<='."""
        rhs = self.bound - self.offset
        coeffs = self.coeffs
        if self.relation == ">=":
            coeffs = tuple(-c for c in coeffs)
            rhs = -rhs
        return _normalize_key(coeffs, rhs)

    def canonical_scaled(self) -> "Inequality":
        """The '<='-oriented coprime-integer representative of this inequality."""
        return inequality_from_key(self.scenario, self.key())

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "coeffs": [str(c) for c in self.coeffs],
            "offset": str(self.offset),
            "bound": str(self.bound),
            "relation": self.relation,
        }

    @classmethod
    def from_dict(cls, d) -> "Inequality":
        return cls(
            Scenario.from_dict(d["scenario"]),
            tuple(rational(c) for c in d["coeffs"]),
            rational(d["offset"]),
            rational(d["bound"]),
            d["relation"],
        )


def _normalize_key(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple:
    values = list(coeffs) + [rhs]
    denom = 1
    for v in values:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in values]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def inequality_from_key(scenario: Scenario, key: tuple) -> Inequality:
    return Inequality(scenario, tuple(key[:-1]), ZERO, Fraction(key[-1]), "<=")


def from_cg_table(
    scenario: Scenario,
    corner,
    alice_marginals: Sequence,
    bob_marginals: Sequence,
    joints: Sequence[Sequence],
    bound,
    relation: str = "<=",
) -> Inequality:
    """Build an inequality from the usual tabular notation.

    ``alice_marginals`` label the rows (one per (input, outcome) pair of
    Alice, outcomes before the last), ``bob_marginals`` the columns, and
    ``joints`` is the row-major coefficient matrix.  ``corner`` is the
    constant added to the combination.
    """
    alpha = scenario.mA * (scenario.kA - 1)
    beta = scenario.mB * (scenario.kB - 1)
    if len(alice_marginals) != alpha or len(bob_marginals) != beta:
        raise DimensionMismatch("marginal label count does not match scenario")
    if len(joints) != alpha or any(len(r) != beta for r in joints):
        raise DimensionMismatch("joint coefficient block has wrong shape")
    coeffs = (
        tuple(rational(c) for c in alice_marginals)
        + tuple(rational(c) for c in bob_marginals)
        + tuple(rational(c) for row in joints for c in row)
    )
    return Inequality(scenario, coeffs, rational(corner), rational(bound), relation)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def ch() -> Inequality:
    """The CHSH inequality in CH form, I_CH <= 0."""
    return from_cg_table(CHSH, 0, (-1, 0), (-1, 0), [[1, 1], [1, -1]], 0)


def cglmp() -> Inequality:
    """The three-outcome CGLMP inequality on the 2-input scenario with
    no-detection outcomes, I_CGLMP <= 0."""
    s = CHSH.with_no_detection()
    return from_cg_table(
        s,
        0,
        (-1, -1, 0, 0),
        (-1, -1, 0, 0),
        [
            [1, 0, 1, 1],
            [1, 1, 0, 1],
            [1, 1, -1, -1],
            [0, 1, 0, -1],
        ],
        0,
    )


def ch_eta(eff: Efficiencies) -> Inequality:
    """The efficiency-weighted CH inequality, I <= 0 (upper form)."""
    a, b = eff.etaA, eff.etaB
    return from_cg_table(
        CHSH, 0, (-a, 0), (-b, 0), [[a * b, a * b], [a * b, -a * b]], 0
    )


def ch_eta_lower(eff: Efficiencies) -> Inequality:
    """The lower form I >= -1, recast canonically as -I <= 1."""
    upper = ch_eta(eff)
    return Inequality(CHSH, tuple(-c for c in upper.coeffs), ZERO, ONE, "<=")


def cglmp_eta(eff: Efficiencies) -> Inequality:
    """The inequality induced by the CGLMP facet after post-selection:
    all-joint coefficients etaA*etaB, bounded by etaA(1-etaB)+etaB(1-etaA)."""
    a, b = eff.etaA, eff.etaB
    e = a * b
    return from_cg_table(
        CHSH,
        0,
        (-e, 0),
        (-e, 0),
        [[e, e], [e, -e]],
        a * (1 - b) + b * (1 - a),
    )


THREE_INPUT_L0 = Scenario(3, 2, 2, 2, no_detection_B=True)
THREE_INPUT_PS = Scenario(3, 2, 2, 2)


def i3223(k: int) -> Inequality:
    """The three-input facet families of the 3x2-input a-priori polytope
    (Alice binary, Bob with a no-detection outcome)."""
    s = THREE_INPUT_L0
    if k == 1:
        return from_cg_table(
            s,
            0,
            (-1, 0, 0),
            (-1, -1, 0, 0),
            [[1, 1, 1, 0], [1, 0, -1, 0], [0, 1, -1, 0]],
            0,
        )
    if k == 2:
        return from_cg_table(
            s,
            0,
            (-1, -1, 0),
            (-1, 0, 0, 0),
            [[1, 0, 1, 0], [1, 0, 0, 1], [1, 0, -1, -1]],
            0,
        )
    if k == 3:
        return from_cg_table(
            s,
            0,
            (1, 0, 0),
            (1, -1, 0, 0),
            [[-1, -1, -1, -1], [-1, 1, -1, 1], [-1, 1, 1, -1]],
            1,
        )
    raise ValueError("k must be 1, 2 or 3")


def ch_eta_3in(eta) -> Inequality:
    """The grouped CH inequality on the 3-input post-selected scenario
    (Alice perfect detection), I <= 0."""
    e = rational(eta)
    return from_cg_table(
        THREE_INPUT_PS, 0, (-1, 0, 0), (-e, 0), [[e, e], [e, -e], [0, 0]], 0
    )


def i3223_1_eta(eta) -> Inequality:
    """The genuinely new three-input inequality for the post-selected
    polytope with Alice perfect detection, I <= eta."""
    e = rational(eta)
    return from_cg_table(
        THREE_INPUT_PS,
        0,
        (-(1 - e), 0, e),
        (0, 0),
        [[0, e], [e, -e], [-e, -e]],
        e,
    )


# ---------------------------------------------------------------------------
# Threshold functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdReport:
    """Exact values of the efficiency-threshold functions at one pair.

    ``h`` is None when one efficiency equals 1 (its defining formula divides
    by 1-eta); the lower-bound inequality is never a facet there.
    """

    etaA: Fraction
    etaB: Fraction
    f1: Fraction
    f2AB: Fraction
    f2BA: Fraction
    g: Fraction
    h: Optional[Fraction]
    F: Fraction
    G: Fraction
    upper_nontrivial: bool
    lower_candidate: bool
    lower_facet: bool


def thresholds(eff: Efficiencies) -> ThresholdReport:
    a, b = eff.etaA, eff.etaB

    def f1(u, v):
        return (1 - u) * (1 - v) * (3 * u * v - u - v)

    def f2(u, v):
        return f1(u, v) + 2 * (1 - u) ** 2 * v ** 2

    f1ab = f1(a, b)
    f2ab = f2(a, b)
    f2ba = f2(b, a)
    g = f1ab + f2ab + f2ba + 2 * (1 - a) * (1 - b) * (a + b - 2 * a * b)
    if a == 1 or b == 1:
        h = None
    else:
        h = (
            f1ab
            + f2ab / (1 - a)
            + f2ba / (1 - b)
            - 2 * (a + b - 2 * a * b) * (3 * a * b - 1)
        )
    F = (a + b - a * b) / (2 * a * b)
    G = (2 - a - b + a * b) / (2 * a * b)
    return ThresholdReport(
        etaA=a,
        etaB=b,
        f1=f1ab,
        f2AB=f2ab,
        f2BA=f2ba,
        g=g,
        h=h,
        F=F,
        G=G,
        upper_nontrivial=a + b < 3 * a * b,
        lower_candidate=a + b + a * b > 2,
        lower_facet=(h is not None and h < 0),
    )


# ---------------------------------------------------------------------------
# Functional representation on the full table space
# ---------------------------------------------------------------------------

def _flat_index(s: Scenario, x: int, y: int, a: int, b: int) -> int:
    return ((x * s.mB + y) * s.kA + a) * s.kB + b


def _flat_size(s: Scenario) -> int:
    return s.mA * s.mB * s.kA * s.kB


@lru_cache(maxsize=None)
def _cg_basis_tables(s: Scenario) -> tuple:
    """Flattened integer tables of to_full(0) and to_full(e_i) - to_full(0).

    Used to convert a full-table functional back to its canonical CG form:
    the reconstruction map is affine with integer coefficients.
    """
    dim = s.cg_dim
    zero = to_full(CGVector(s, (ZERO,) * dim), allow_negative=True)

    def flatten(t: JointTable) -> tuple:
        out = []
        for x in range(s.mA):
            for y in range(s.mB):
                for a in range(s.kA):
                    for b in range(s.kB):
                        v = t.p[x][y][a][b]
                        assert v.denominator == 1
                        out.append(int(v))
        return tuple(out)

    t0 = flatten(zero)
    basis = []
    for i in range(dim):
        coords = [ZERO] * dim
        coords[i] = ONE
        ti = flatten(to_full(CGVector(s, tuple(coords)), allow_negative=True))
        basis.append(tuple(u - v for u, v in zip(ti, t0)))
    return t0, tuple(basis)


def functional_to_full(ineq: Inequality) -> tuple:
    """A full-table coefficient representation (w, const) of the functional.

    The representation is not unique (marginals are expanded at the first
    remote input); equality of functionals must be checked after converting
    back with :func:`functional_from_full`.
    """
    s = ineq.scenario
    w = [ZERO] * _flat_size(s)
    for x in range(s.mA):
        for a in range(s.kA - 1):
            c = ineq.coeffs[cg_index_marginal_A(s, x, a)]
            if c:
                for b in range(s.kB):
                    w[_flat_index(s, x, 0, a, b)] += c
    for y in range(s.mB):
        for b in range(s.kB - 1):
            c = ineq.coeffs[cg_index_marginal_B(s, y, b)]
            if c:
                for a in range(s.kA):
                    w[_flat_index(s, 0, y, a, b)] += c
    for x in range(s.mA):
        for a in range(s.kA - 1):
            for y in range(s.mB):
                for b in range(s.kB - 1):
                    c = ineq.coeffs[cg_index_joint(s, x, a, y, b)]
                    if c:
                        w[_flat_index(s, x, y, a, b)] += c
    return tuple(w), ineq.offset


def functional_from_full(
    s: Scenario, w: Sequence, const, bound, relation: str = "<="
) -> Inequality:
    """Restrict a full-table functional to the no-signaling subspace and
    express it canonically in CG coordinates."""
    t0, basis = _cg_basis_tables(s)
    const = rational(const)
    offset = const + sum(wi * ti for wi, ti in zip(w, t0) if ti)
    coeffs = tuple(sum(wi * ti for wi, ti in zip(w, bi) if ti) for bi in basis)
    return Inequality(s, coeffs, offset, rational(bound), relation)


# ---------------------------------------------------------------------------
# Symmetry orbits
# ---------------------------------------------------------------------------

def _transposition_perms(
    s: Scenario, fix_no_detection: bool, include_party_swap: bool
) -> list:
    """Flat-index permutations generating the relabeling group.

    Generators: adjacent input transpositions on each side, adjacent outcome
    transpositions per observable (holding the no-detection outcome fixed
    when requested), and the party exchange when the scenario is symmetric.
    All generators are involutions.
    """
    n = _flat_size(s)
    perms = []

    def build(mapper) -> tuple:
        perm = [0] * n
        for x in range(s.mA):
            for y in range(s.mB):
                for a in range(s.kA):
                    for b in range(s.kB):
                        x2, y2, a2, b2 = mapper(x, y, a, b)
                        perm[_flat_index(s, x, y, a, b)] = _flat_index(
                            s, x2, y2, a2, b2
                        )
        return tuple(perm)

    def swap(i, j):
        return lambda v: j if v == i else (i if v == j else v)

    for x0 in range(s.mA - 1):
        f = swap(x0, x0 + 1)
        perms.append(build(lambda x, y, a, b, f=f: (f(x), y, a, b)))
    for y0 in range(s.mB - 1):
        f = swap(y0, y0 + 1)
        perms.append(build(lambda x, y, a, b, f=f: (x, f(y), a, b)))
    topA = s.kA - 1 if (fix_no_detection and s.no_detection_A) else s.kA
    topB = s.kB - 1 if (fix_no_detection and s.no_detection_B) else s.kB
    for x0 in range(s.mA):
        for a0 in range(topA - 1):
            f = swap(a0, a0 + 1)
            perms.append(
                build(lambda x, y, a, b, x0=x0, f=f: (x, y, f(a) if x == x0 else a, b))
            )
    for y0 in range(s.mB):
        for b0 in range(topB - 1):
            f = swap(b0, b0 + 1)
            perms.append(
                build(lambda x, y, a, b, y0=y0, f=f: (x, y, a, f(b) if y == y0 else b))
            )
    if include_party_swap and s.mA == s.mB and s.kA == s.kB:
        perms.append(build(lambda x, y, a, b: (y, x, b, a)))
    return perms


def _orbit_keys(
    ineq: Inequality, fix_no_detection: bool, include_party_swap: Optional[bool]
) -> dict:
    """Map from canonical key to one full-tensor witness, for the whole orbit."""
    s = ineq.scenario
    if include_party_swap is None:
        include_party_swap = s.mA == s.mB and s.kA == s.kB
    perms = _transposition_perms(s, fix_no_detection, include_party_swap)
    t0, basis = _cg_basis_tables(s)

    key0 = ineq.key()
    rhs0 = key0[-1]
    seed = inequality_from_key(s, key0)
    w0, _ = functional_to_full(seed)
    w0 = tuple(int(c) for c in w0)

    def cg_key(w: tuple) -> tuple:
        off = sum(wi * ti for wi, ti in zip(w, t0) if ti)
        coeffs = [sum(wi * ti for wi, ti in zip(w, bi) if ti) for bi in basis]
        coeffs.append(rhs0 - off)
        g = 0
        for v in coeffs:
            g = gcd(g, abs(v))
        if g > 1:
            coeffs = [v // g for v in coeffs]
        return tuple(coeffs)

    seen = {cg_key(w0): w0}
    frontier = [w0]
    while frontier:
        nxt = []
        for w in frontier:
            for perm in perms:
                w2 = tuple(w[perm[i]] for i in range(len(perm)))
                k2 = cg_key(w2)
                if k2 not in seen:
                    seen[k2] = w2
                    nxt.append(w2)
        frontier = nxt
    return seen


def symmetry_orbit(
    ineq: Inequality,
    fix_no_detection: bool = False,
    include_party_swap: Optional[bool] = None,
) -> list:
    """All inequalities equivalent to ``ineq`` under relabelings.

    Party exchange is included by default exactly when the scenario is
    symmetric (mA == mB and equal outcome counts); pass
    ``include_party_swap=False`` to restrict to single-party relabelings,
    e.g. when the two sides carry different detection efficiencies.
    Elements are returned canonically scaled, in deterministic order.
    """
    keys = _orbit_keys(ineq, fix_no_detection, include_party_swap)
    return [inequality_from_key(ineq.scenario, k) for k in sorted(keys)]


def orbit_key_set(
    ineq: Inequality,
    fix_no_detection: bool = False,
    include_party_swap: Optional[bool] = None,
) -> frozenset:
    """The orbit as a set of canonical keys, for fast classification."""
    return frozenset(_orbit_keys(ineq, fix_no_detection, include_party_swap))


def canonical_form(
    ineq: Inequality,
    fix_no_detection: bool = False,
    include_party_swap: Optional[bool] = None,
) -> Inequality:
    """The orbit-minimal representative under the lexicographic key order.

    Constant on symmetry orbits and idempotent; equivalent inequalities map
    to equal objects.
    """
    keys = _orbit_keys(ineq, fix_no_detection, include_party_swap)
    return inequality_from_key(ineq.scenario, min(keys))
