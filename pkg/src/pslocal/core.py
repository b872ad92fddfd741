"""Exact-rational correlation tables and Collins-Gisin coordinates.

Conventions
-----------
* Inputs and outcomes are 0-based internally.  The no-detection outcome, when
  a side has one, is encoded as the *last* outcome index of that side.  All
  user-facing serialization is 1-based, matching the usual Bell-scenario
  notation.
* All probabilities are `fractions.Fraction`; floats never enter this module.
* Collins-Gisin coordinates are ordered as: Alice first-outcome marginals
  (by input, then outcome), Bob first-outcome marginals, then the joint block
  in row-major order (Alice label rows, Bob label columns).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    DimensionMismatch,
    EfficiencyMismatch,
    NotAProbability,
    SignalingInput,
    UnknownName,
    ZeroEfficiency,
)

RationalLike = Union[int, str, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, Fraction, "p/q" or decimal string.

    Floats are rejected on purpose: converting binary floats silently would
    defeat the exactness guarantees of this module.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    """Render a rational as "num/den" (or "num" for integers)."""
    return str(q)


@dataclass(frozen=True, order=True)
class Scenario:
    """A bipartite Bell scenario.

    ``nA``/``nB`` count the *conclusive* outcomes; when a side carries a
    no-detection outcome, its effective outcome count is one larger and the
    extra outcome is always the last index.
    """

    mA: int
    mB: int
    nA: int
    nB: int
    no_detection_A: bool = False
    no_detection_B: bool = False

    def __post_init__(self) -> None:
        if self.mA < 1 or self.mB < 1:
            raise ValueError("input counts must be >= 1")
        if self.nA < 2 or self.nB < 2:
            raise ValueError("conclusive outcome counts must be >= 2")

    @property
    def kA(self) -> int:
        """Effective number of outcomes on Alice's side."""
        return self.nA + (1 if self.no_detection_A else 0)

    @property
    def kB(self) -> int:
        """Effective number of outcomes on Bob's side."""
        return self.nB + (1 if self.no_detection_B else 0)

    @property
    def cg_dim(self) -> int:
        """Dimension of the associated correlation space."""
        return (self.mA * (self.kA - 1) + 1) * (self.mB * (self.kB - 1) + 1) - 1

    def with_no_detection(self) -> "Scenario":
        """The same scenario with a no-detection outcome added on both sides."""
        if self.no_detection_A or self.no_detection_B:
            raise ValueError("scenario already carries a no-detection outcome")
        return Scenario(self.mA, self.mB, self.nA, self.nB, True, True)

    def conclusive(self) -> "Scenario":
        """The scenario restricted to conclusive outcomes."""
        return Scenario(self.mA, self.mB, self.nA, self.nB)

    @classmethod
    def chsh(cls) -> "Scenario":
        return cls(2, 2, 2, 2)

    def to_dict(self) -> dict:
        return {
            "mA": self.mA,
            "mB": self.mB,
            "nA": self.nA,
            "nB": self.nB,
            "no_detection_A": self.no_detection_A,
            "no_detection_B": self.no_detection_B,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Scenario":
        if "no_detection" in d:
            nd = bool(d["no_detection"])
            return cls(d["mA"], d["mB"], d["nA"], d["nB"], nd, nd)
        return cls(
            d["mA"],
            d["mB"],
            d["nA"],
            d["nB"],
            bool(d.get("no_detection_A", False)),
            bool(d.get("no_detection_B", False)),
        )


CHSH = Scenario.chsh()


def _as_table(scenario: Scenario, entries) -> tuple:
    """Coerce nested entries into an immutable [x][y][a][b] Fraction tensor."""
    mA, mB, kA, kB = scenario.mA, scenario.mB, scenario.kA, scenario.kB
    if len(entries) != mA:
        raise DimensionMismatch("wrong number of Alice inputs")
    table = []
    for x in range(mA):
        if len(entries[x]) != mB:
            raise DimensionMismatch("wrong number of Bob inputs")
        row = []
        for y in range(mB):
            block = entries[x][y]
            if len(block) != kA or any(len(b) != kB for b in block):
                raise DimensionMismatch("outcome block has wrong shape")
            row.append(tuple(tuple(rational(v) for v in b) for b in block))
        table.append(tuple(row))
    return tuple(table)


@dataclass(frozen=True)
class JointTable:
    """Exact conditional probability table P(a,b|x,y) over a scenario.

    Each (x, y) block must sum to one exactly.  Entries must be non-negative
    unless ``allow_negative`` is set (used for affine slice combinations that
    may leave the non-signaling polytope).
    """

    scenario: Scenario
    p: tuple
    allow_negative: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _as_table(self.scenario, self.p))
        for x in range(self.scenario.mA):
            for y in range(self.scenario.mB):
                block = self.p[x][y]
                total = sum(v for row in block for v in row)
                if total != 1:
                    raise NotAProbability(
                        f"block (x={x}, y={y}) sums to {total}, not 1"
                    )
                if not self.allow_negative:
                    for row in block:
                        for v in row:
                            if v < 0 or v > 1:
                                raise NotAProbability(f"entry {v} outside [0, 1]")

    def prob(self, x: int, y: int, a: int, b: int) -> Fraction:
        return self.p[x][y][a][b]

    def marginal_A(self, x: int, a: int, y: int = 0) -> Fraction:
        """P_A(a|x), computed from the given Bob input (default 0)."""
        return sum(self.p[x][y][a])

    def marginal_B(self, y: int, b: int, x: int = 0) -> Fraction:
        """P_B(b|y), computed from the given Alice input (default 0)."""
        return sum(row[b] for row in self.p[x][y])

    def is_proper(self) -> bool:
        """True when every entry lies in [0, 1]."""
        return all(
            0 <= v <= 1
            for x in range(self.scenario.mA)
            for y in range(self.scenario.mB)
            for row in self.p[x][y]
            for v in row
        )

    def as_nested(self) -> list:
        return [
            [[list(row) for row in self.p[x][y]] for y in range(self.scenario.mB)]
            for x in range(self.scenario.mA)
        ]


@dataclass(frozen=True)
class CGVector:
    """Collins-Gisin coordinates of a non-signaling correlation."""

    scenario: Scenario
    coords: tuple

    def __post_init__(self) -> None:
        coords = tuple(rational(v) for v in self.coords)
        if len(coords) != self.scenario.cg_dim:
            raise DimensionMismatch(
                f"expected {self.scenario.cg_dim} coordinates, got {len(coords)}"
            )
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.coords)


def cg_index_marginal_A(s: Scenario, x: int, a: int) -> int:
    return x * (s.kA - 1) + a


def cg_index_marginal_B(s: Scenario, y: int, b: int) -> int:
    return s.mA * (s.kA - 1) + y * (s.kB - 1) + b


def cg_index_joint(s: Scenario, x: int, a: int, y: int, b: int) -> int:
    alpha = s.mA * (s.kA - 1)
    beta = s.mB * (s.kB - 1)
    return alpha + beta + (x * (s.kA - 1) + a) * beta + (y * (s.kB - 1) + b)


def is_nonsignaling(t: JointTable) -> bool:
    """Exact check that both marginals are independent of the remote input."""
    s = t.scenario
    for x in range(s.mA):
        for a in range(s.kA):
            ref = t.marginal_A(x, a, y=0)
            for y in range(1, s.mB):
                if t.marginal_A(x, a, y=y) != ref:
                    return False
    for y in range(s.mB):
        for b in range(s.kB):
            ref = t.marginal_B(y, b, x=0)
            for x in range(1, s.mA):
                if t.marginal_B(y, b, x=x) != ref:
                    return False
    return True


def to_cg(t: JointTable) -> CGVector:
    """Collins-Gisin coordinates of a no-signaling table (exact)."""
    if not is_nonsignaling(t):
        raise SignalingInput("table is signaling; CG coordinates undefined")
    s = t.scenario
    coords = []
    for x in range(s.mA):
        for a in range(s.kA - 1):
            coords.append(t.marginal_A(x, a))
    for y in range(s.mB):
        for b in range(s.kB - 1):
            coords.append(t.marginal_B(y, b))
    for x in range(s.mA):
        for a in range(s.kA - 1):
            for y in range(s.mB):
                for b in range(s.kB - 1):
                    coords.append(t.p[x][y][a][b])
    return CGVector(s, tuple(coords))


def to_full(v: CGVector, allow_negative: bool = False) -> JointTable:
    """Reconstruct the full table from CG coordinates (exact inverse of to_cg).

    Raises NotAProbability when a reconstructed entry leaves [0, 1], unless
    ``allow_negative`` is set.
    """
    s = v.scenario
    kA, kB = s.kA, s.kB
    entries = []
    for x in range(s.mA):
        row = []
        for y in range(s.mB):
            block = [[ZERO] * kB for _ in range(kA)]
            for a in range(kA - 1):
                for b in range(kB - 1):
                    block[a][b] = v.coords[cg_index_joint(s, x, a, y, b)]
            for a in range(kA - 1):
                block[a][kB - 1] = v.coords[cg_index_marginal_A(s, x, a)] - sum(
                    block[a][:-1]
                )
            for b in range(kB - 1):
                block[kA - 1][b] = v.coords[cg_index_marginal_B(s, y, b)] - sum(
                    block[a][b] for a in range(kA - 1)
                )
            block[kA - 1][kB - 1] = 1 - sum(
                block[a][b] for a in range(kA) for b in range(kB)
            )
            row.append(block)
        entries.append(row)
    return JointTable(s, entries, allow_negative=allow_negative)


@dataclass(frozen=True, order=True)
class Efficiencies:
    """An exact detection-efficiency pair with 0 < eta <= 1 on each side."""

    etaA: Fraction
    etaB: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "etaA", rational(self.etaA))
        object.__setattr__(self, "etaB", rational(self.etaB))
        for eta in (self.etaA, self.etaB):
            if not 0 < eta <= 1:
                raise ValueError(f"efficiency {eta} outside (0, 1]")

    @classmethod
    def of(cls, etaA: RationalLike, etaB: RationalLike) -> "Efficiencies":
        return cls(rational(etaA), rational(etaB))


def lift(pps: JointTable, eff: Efficiencies) -> JointTable:
    """The unique a-priori table with the given efficiencies post-selecting to pps.

    The efficiency constraints determine the no-detection blocks completely:
    conclusive/conclusive entries are scaled by etaA*etaB, the mixed blocks
    carry the scaled marginals, and the double-no-detection weight is
    (1-etaA)(1-etaB) for every setting pair.
    """
    s = pps.scenario
    if s.no_detection_A or s.no_detection_B:
        raise DimensionMismatch("input table must be over a conclusive scenario")
    if not is_nonsignaling(pps):
        raise SignalingInput("cannot lift a signaling table")
    etaA, etaB = eff.etaA, eff.etaB
    s0 = s.with_no_detection()
    entries = []
    for x in range(s.mA):
        row = []
        for y in range(s.mB):
            block = [[ZERO] * s0.kB for _ in range(s0.kA)]
            for a in range(s.nA):
                for b in range(s.nB):
                    block[a][b] = etaA * etaB * pps.p[x][y][a][b]
            for a in range(s.nA):
                block[a][s.nB] = etaA * (1 - etaB) * pps.marginal_A(x, a, y=y)
            for b in range(s.nB):
                block[s.nA][b] = (1 - etaA) * etaB * pps.marginal_B(y, b, x=x)
            block[s.nA][s.nB] = (1 - etaA) * (1 - etaB)
            row.append(block)
        entries.append(row)
    return JointTable(s0, entries)


def postselect(p0: JointTable, eff: Efficiencies) -> JointTable:
    """Condition an a-priori table on both detectors having fired.

    The input must satisfy the detection-efficiency constraints exactly for
    ``eff``; the output is then the conclusive block divided by etaA*etaB,
    automatically normalized and no-signaling.
    """
    s0 = p0.scenario
    if not (s0.no_detection_A and s0.no_detection_B):
        raise DimensionMismatch("input table must carry no-detection outcomes")
    etaA, etaB = eff.etaA, eff.etaB
    if etaA * etaB == 0:
        raise ZeroEfficiency("cannot post-select with etaA*etaB = 0")
    s = s0.conclusive()
    # Check the per-side efficiency constraints exactly.
    for x in range(s.mA):
        for y in range(s.mB):
            for b in range(s0.kB):
                conclusive_a = sum(p0.p[x][y][a][b] for a in range(s.nA))
                if conclusive_a != etaA * p0.marginal_B(y, b, x=x):
                    raise EfficiencyMismatch(
                        f"Alice-side constraint fails at x={x}, y={y}, b={b}"
                    )
            for a in range(s0.kA):
                conclusive_b = sum(p0.p[x][y][a][b] for b in range(s.nB))
                if conclusive_b != etaB * p0.marginal_A(x, a, y=y):
                    raise EfficiencyMismatch(
                        f"Bob-side constraint fails at x={x}, y={y}, a={a}"
                    )
    entries = [
        [
            [
                [p0.p[x][y][a][b] / (etaA * etaB) for b in range(s.nB)]
                for a in range(s.nA)
            ]
            for y in range(s.mB)
        ]
        for x in range(s.mA)
    ]
    return JointTable(s, entries)


def _chsh_cg(marg_A, marg_B, joints) -> CGVector:
    coords = tuple(marg_A) + tuple(marg_B) + tuple(itertools.chain(*joints))
    return CGVector(CHSH, coords)


def named_correlation(name: str, **params) -> JointTable:
    """Reference correlations of the CHSH scenario.

    Names: "PR", "PR'", "r" (fully random), "s" (all Collins-Gisin
    coordinates zero), and "slice" with parameters ``x``, ``y`` (rationals)
    for the affine combination x*PR' + y*PR + (1-x-y)*r.  Slice output may
    have negative entries; callers must check positivity before polytope use.
    """
    h = HALF
    q = Fraction(1, 4)
    if name == "PR":
        return to_full(_chsh_cg((h, h), (h, h), [[h, h], [h, ZERO]]))
    if name in ("PR'", "PR2"):
        return to_full(_chsh_cg((h, h), (h, h), [[ZERO, h], [h, h]]))
    if name == "r":
        return to_full(_chsh_cg((h, h), (h, h), [[q, q], [q, q]]))
    if name == "s":
        return to_full(CGVector(CHSH, (ZERO,) * 8))
    if name == "slice":
        x = rational(params["x"])
        y = rational(params["y"])
        basis = params.get(
            "basis",
            (named_correlation("PR'"), named_correlation("PR"), named_correlation("r")),
        )
        p1, p2, p3 = basis
        s = p1.scenario
        if p2.scenario != s or p3.scenario != s:
            raise DimensionMismatch("slice basis tables over different scenarios")
        w3 = 1 - x - y
        entries = [
            [
                [
                    [
                        x * p1.p[i][j][a][b]
                        + y * p2.p[i][j][a][b]
                        + w3 * p3.p[i][j][a][b]
                        for b in range(s.kB)
                    ]
                    for a in range(s.kA)
                ]
                for j in range(s.mB)
            ]
            for i in range(s.mA)
        ]
        return JointTable(s, entries, allow_negative=True)
    raise UnknownName(f"unknown correlation name {name!r}")


# ---------------------------------------------------------------------------
# Serialization: bit-exact JSON round trip for correlation tables.
# ---------------------------------------------------------------------------

def table_to_dict(t: JointTable) -> dict:
    s = t.scenario
    payload = {}
    for x in range(s.mA):
        for y in range(s.mB):
            block = {}
            for a in range(s.kA):
                for b in range(s.kB):
                    block[f"a={a + 1},b={b + 1}"] = format_rational(t.p[x][y][a][b])
            payload[f"x={x + 1},y={y + 1}"] = block
    return {"scenario": s.to_dict(), "p": payload}


def table_from_dict(d: Mapping) -> JointTable:
    s = Scenario.from_dict(d["scenario"])
    entries = [
        [[[ZERO] * s.kB for _ in range(s.kA)] for _ in range(s.mB)]
        for _ in range(s.mA)
    ]
    for xy, block in d["p"].items():
        xs, ys = xy.split(",")
        x, y = int(xs.split("=")[1]) - 1, int(ys.split("=")[1]) - 1
        for ab, value in block.items():
            as_, bs = ab.split(",")
            a, b = int(as_.split("=")[1]) - 1, int(bs.split("=")[1]) - 1
            entries[x][y][a][b] = rational(value)
    return JointTable(s, entries)


def table_to_json(t: JointTable) -> str:
    return json.dumps(table_to_dict(t), sort_keys=True)


def table_from_json(payload: str) -> JointTable:
    return table_from_dict(json.loads(payload))
