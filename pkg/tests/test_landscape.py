import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pspin.disorder import EnergyTable, SpinConfig, build_energy_table
from pspin.errors import PreconditionError
from pspin.landscape import (SQRT_2LN2, LevelSet, OverlapGrid, Unit, forbidden_pairs,
                             ground_state, hamming, histogram_csv, level_set, overlap,
                             overlap_histogram, pairs_json, s_epsilon)


@pytest.fixture
def table16():
    return EnergyTable.from_energies(np.arange(16) / 16.0)


def test_full_range(table16):
    assert len(level_set(table16)) == 16


def test_empty_above_max(table16):
    assert len(level_set(table16, 2.0, 3.0)) == 0


def test_hand_set_window(table16):
    ls = level_set(table16, 0.25, 0.5)
    assert ls.members.tolist() == [4, 5, 6, 7, 8]


def test_scaled_units(table16):
    ls = level_set(table16, 0.25 / SQRT_2LN2, 0.5 / SQRT_2LN2, Unit.SQRT_TWO_LN_TWO)
    assert ls.members.tolist() in ([4, 5, 6, 7, 8], [5, 6, 7, 8], [4, 5, 6, 7])


def test_malformed_bounds(table16):
    with pytest.raises(PreconditionError):
        level_set(table16, 1.0, 0.0)
    with pytest.raises(PreconditionError):
        level_set(table16, math.nan, 0.0)


def test_s_epsilon_definition():
    t = build_energy_table(12, 3, 5, "rem")
    s = s_epsilon(t, 0.3)
    thr = 0.7 * SQRT_2LN2
    assert np.array_equal(s.members, np.flatnonzero(t.energies >= thr))


def test_level_set_monotone():
    t = build_energy_table(10, 3, 1, "rem")
    a = set(level_set(t, -0.1, 0.1).members.tolist())
    b = set(level_set(t, -0.2, 0.3).members.tolist())
    assert a <= b


def test_level_set_csv(table16):
    ls = level_set(table16, 0.9, 1.0)
    assert ls.to_csv(table16) == "bits,energy\n15,0.9375\n"
    assert ls.to_csv() == "bits\n15\n"


def test_overlap_basics():
    s = SpinConfig(0b1011, 4)
    assert overlap(s, s) == 1
    assert overlap(s, s.complement()) == -1
    assert overlap(SpinConfig(0, 4), SpinConfig(0b0011, 4)) == 0
    assert isinstance(overlap(s, s), Fraction)
    with pytest.raises(PreconditionError):
        hamming(SpinConfig(0, 3), SpinConfig(0, 4))


def test_overlap_grid():
    g = OverlapGrid(5).values
    assert len(g) == 6 and g[0] == -1 and g[-1] == 1
    assert sorted(-x for x in g) == g


def test_histogram_singleton():
    assert overlap_histogram([SpinConfig(3, 4)]) == {Fraction(1): 1}


def test_histogram_antipodes():
    h = overlap_histogram([SpinConfig(0, 4), SpinConfig(15, 4)])
    assert h == {Fraction(1): 2, Fraction(-1): 2}


@pytest.mark.parametrize("n", [1, 4, 7])
def test_histogram_full_cube(n):
    h = overlap_histogram(np.arange(1 << n), n)
    for d in range(n + 1):
        assert h[Fraction(n - 2 * d, n)] == (1 << n) * comb(n, d)


def test_histogram_empty():
    with pytest.raises(PreconditionError):
        overlap_histogram(np.array([], dtype=np.int64), 4)


def test_histogram_csv():
    text = histogram_csv({Fraction(1): 2, Fraction(-1): 2})
    assert text == "overlap,count\n-1,2\n1,2\n"


def test_forbidden_examples():
    one = [SpinConfig(5, 4)]
    assert forbidden_pairs(one, 0.2, 0.8) == []
    assert forbidden_pairs([SpinConfig(0, 4), SpinConfig(0b0011, 4)], 0.6, 0.9) == []
    pairs = forbidden_pairs([SpinConfig(0, 4), SpinConfig(0b0111, 4)], 0.5, 0.9)
    assert [(a.bits, b.bits) for a, b in pairs] == [(0, 7), (7, 0)]
    assert pairs_json(pairs) == "[[0, 7], [7, 0]]"


def test_forbidden_bad_fractions():
    with pytest.raises(PreconditionError):
        forbidden_pairs([SpinConfig(0, 4)], 0.5, 0.4)


def test_forbidden_boundary_is_allowed():
    # d/n exactly nu1 or nu2 is not forbidden (open interval)
    pts = np.array([0b0000000000, 0b0000000011, 0b1111100000], dtype=np.int64)
    assert forbidden_pairs(pts, 0.2, 0.5, 10) == []


@given(st.lists(st.integers(0, 255), min_size=1, max_size=40, unique=True),
       st.floats(0.05, 0.45), st.floats(0.5, 0.95))
@settings(max_examples=150, deadline=None)
def test_ogp_iff_no_forbidden(bits, nu1, nu2):
    n = 8
    got = {(a.bits, b.bits) for a, b in forbidden_pairs(np.array(bits), nu1, nu2, n)}
    ref = {(a, b) for a in bits for b in bits
           if nu1 < (a ^ b).bit_count() / n < nu2}
    assert got == ref


@given(st.lists(st.integers(0, 1023), min_size=1, max_size=60))
@settings(max_examples=100, deadline=None)
def test_histogram_mass(bits):
    ls = np.unique(np.array(bits))
    h = overlap_histogram(ls, 10)
    assert sum(h.values()) == ls.size**2


def test_ground_state():
    n = 5
    t = EnergyTable.from_energies(np.arange(1 << n) / (1 << n))
    c, e = ground_state(t)
    assert c.bits == (1 << n) - 1 and e == pytest.approx(31 / 32)
    c, _ = ground_state(EnergyTable.from_energies(np.zeros(8)))
    assert c.bits == 0


def test_levelset_iteration():
    ls = LevelSet(np.array([1, 3]), 3, 0.0, 1.0)
    assert [c.bits for c in ls] == [1, 3] and len(ls) == 2
