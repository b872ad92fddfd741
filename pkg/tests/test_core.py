import random
from fractions import Fraction

import pytest

from pslocal.core import (
    CHSH,
    CGVector,
    Efficiencies,
    JointTable,
    Scenario,
    is_nonsignaling,
    lift,
    named_correlation,
    postselect,
    rational,
    table_from_json,
    table_to_json,
    to_cg,
    to_full,
)
from pslocal.errors import (
    EfficiencyMismatch,
    NotAProbability,
    SignalingInput,
    UnknownName,
)

from conftest import deterministic_table, random_local_table

H = Fraction(1, 2)
Q = Fraction(1, 4)


def test_rational_parsing():
    assert rational("2/3") == Fraction(2, 3)
    assert rational("0.7") == Fraction(7, 10)
    assert rational(3) == 3
    with pytest.raises(TypeError):
        rational(0.5)


def test_scenario_dimensions():
    assert CHSH.cg_dim == 8
    assert CHSH.with_no_detection().cg_dim == 24
    s = Scenario(3, 2, 2, 2, no_detection_A=True, no_detection_B=True)
    assert s.cg_dim == 34
    s32 = Scenario(3, 2, 2, 2, no_detection_B=True)
    assert s32.cg_dim == 19
    with pytest.raises(ValueError):
        Scenario(0, 2, 2, 2)
    with pytest.raises(ValueError):
        Scenario(2, 2, 1, 2)


def test_cg_of_fully_random_point():
    v = to_cg(named_correlation("r"))
    assert v.coords[:4] == (H, H, H, H)
    assert v.coords[4:] == (Q, Q, Q, Q)


def test_cg_of_pr_box():
    v = to_cg(named_correlation("PR"))
    assert v.coords == (H, H, H, H, H, H, H, Fraction(0))


def test_cg_of_deterministic_last_outcome_point():
    t = deterministic_table(CHSH, [1, 1], [1, 1])
    assert to_cg(t).coords == (0,) * 8


def test_round_trip_on_random_local_tables(rng):
    for _ in range(50):
        t = random_local_table(rng, CHSH)
        assert to_full(to_cg(t)) == t
    s0 = CHSH.with_no_detection()
    for _ in range(20):
        t = random_local_table(rng, s0)
        assert to_full(to_cg(t)) == t


def test_to_full_of_zero_vector():
    t = to_full(CGVector(CHSH, (0,) * 8))
    assert t == deterministic_table(CHSH, [1, 1], [1, 1])


def test_to_full_of_pr_prime():
    t = to_full(CGVector(CHSH, (H, H, H, H, 0, H, H, H)))
    assert t.p[0][0][0][0] == 0
    assert t.p[0][0][0][1] == H
    assert t == named_correlation("PR'")


def test_to_full_rejects_negative_reconstruction():
    with pytest.raises(NotAProbability):
        to_full(CGVector(CHSH, (H, H, H, H, 1, 0, 0, 0)))


def test_signaling_table_detected():
    # p(1,1|1,1) = 1 but p(1,1|1,2) = 0 with a deterministic filler column.
    entries = [
        [
            [[1, 0], [0, 0]],
            [[0, 1], [0, 0]],
        ],
        [
            [[1, 0], [0, 0]],
            [[0, 1], [0, 0]],
        ],
    ]
    t = JointTable(CHSH, entries)
    assert is_nonsignaling(t)  # Bob flips outcome with y, marginals still fine?
    entries = [
        [
            [[1, 0], [0, 0]],
            [[0, 0], [0, 1]],
        ],
        [
            [[1, 0], [0, 0]],
            [[1, 0], [0, 0]],
        ],
    ]
    t = JointTable(CHSH, entries)
    assert not is_nonsignaling(t)
    with pytest.raises(SignalingInput):
        to_cg(t)


def test_product_tables_are_nonsignaling(rng):
    for _ in range(20):
        t = random_local_table(rng, CHSH)
        assert is_nonsignaling(t)
    assert is_nonsignaling(named_correlation("PR"))


def test_named_correlations():
    r = named_correlation("r")
    assert all(
        r.p[x][y][a][b] == Q for x in range(2) for y in range(2)
        for a in range(2) for b in range(2)
    )
    s = named_correlation("s")
    assert to_cg(s).coords == (0,) * 8
    with pytest.raises(UnknownName):
        named_correlation("tsirelson")


def test_slice_combinations():
    assert named_correlation("slice", x=0, y=0) == named_correlation("r")
    assert named_correlation("slice", x=0, y=1) == named_correlation("PR")
    assert named_correlation("slice", x=1, y=0) == named_correlation("PR'")
    outside = named_correlation("slice", x=1, y=1)
    assert not outside.is_proper()


def test_lift_at_unit_efficiency_is_identity_up_to_padding():
    p = named_correlation("PR")
    p0 = lift(p, Efficiencies.of(1, 1))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    assert p0.p[x][y][a][b] == p.p[x][y][a][b]
            assert p0.p[x][y][2][2] == 0


def test_lift_of_random_point_at_half_efficiencies():
    p0 = lift(named_correlation("r"), Efficiencies.of("1/2", "1/2"))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    assert p0.p[x][y][a][b] == Fraction(1, 16)
            assert p0.p[x][y][2][2] == Q


def test_lift_conclusive_block_weight(rng):
    eff = Efficiencies.of("3/5", "7/9")
    for _ in range(20):
        p = random_local_table(rng, CHSH)
        p0 = lift(p, eff)
        for x in range(2):
            for y in range(2):
                block = sum(p0.p[x][y][a][b] for a in range(2) for b in range(2))
                assert block == eff.etaA * eff.etaB


def test_lift_postselect_round_trip(rng):
    for _ in range(30):
        p = random_local_table(rng, CHSH)
        eff = Efficiencies.of(
            Fraction(rng.randint(1, 10), 10), Fraction(rng.randint(1, 10), 10)
        )
        assert postselect(lift(p, eff), eff) == p


def test_postselect_detects_mismatch():
    eff = Efficiencies.of("1/2", "1/2")
    p0 = lift(named_correlation("r"), eff)
    entries = p0.as_nested()
    # Move weight between two conclusive entries: block sums stay 1 but the
    # per-outcome efficiency constraints break.
    entries[0][0][0][0] += Fraction(1, 100)
    entries[0][0][1][1] -= Fraction(1, 100)
    bad = JointTable(p0.scenario, entries)
    with pytest.raises(EfficiencyMismatch):
        postselect(bad, eff)


def test_postselect_wrong_efficiencies_rejected():
    p0 = lift(named_correlation("r"), Efficiencies.of("1/2", "1/2"))
    with pytest.raises(EfficiencyMismatch):
        postselect(p0, Efficiencies.of("1/3", "1/2"))


def test_efficiency_validation():
    with pytest.raises(ValueError):
        Efficiencies.of(0, 1)
    with pytest.raises(ValueError):
        Efficiencies.of("3/2", 1)


def test_json_round_trip(rng):
    for _ in range(10):
        t = random_local_table(rng, CHSH.with_no_detection())
        assert table_from_json(table_to_json(t)) == t
    t = named_correlation("PR")
    assert table_from_json(table_to_json(t)) == t
