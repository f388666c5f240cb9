import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ikas import formulas as F
from ikas.core import HyperRect
from ikas.multikey import (
    NotPowerOfTwoError,
    default_three_key_factors,
    four_key,
    four_key_factor,
    four_key_factors,
    three_key,
    two_key,
    two_key_one_hop,
    two_key_ranges,
)
from ikas.temporal import InvalidScheduleError
from ikas.verify import check_enforcing, cover_problems

R = HyperRect.of


@st.composite
def interval(draw, m):
    lo = draw(st.integers(1, m))
    return R((lo, draw(st.integers(lo, m))))


def test_two_key_cover_example():
    s = two_key(16)
    assert s.cover(R((3, 14))) == [R((3, 8)), R((9, 14))]
    assert s.cover(R((4, 4))) == [R((4, 4))]
    assert s.cover(R((1, 16))) == [R((1, 8)), R((9, 16))]


def test_two_key_specials_at_m8():
    # left of each split point: ranges ending there; right: ranges starting after it
    assert two_key_ranges(1, 4) == {(1, 2), (3, 4)}
    assert {(1, 4), (2, 4), (3, 4), (5, 6), (5, 7), (5, 8)} <= two_key_ranges(1, 8)
    assert (2, 3) not in two_key_ranges(1, 8)


def test_two_key_requires_power_of_two():
    with pytest.raises(NotPowerOfTwoError):
        two_key(12)


@pytest.mark.parametrize("m", [4, 8, 16, 32])
def test_two_key_properties(m):
    s = two_key(m)
    assert s.component_count() == 2
    assert s.depth() == F.log2_exact(m) - 1
    assert s.graph.edge_count < F.two_key_bound(m)
    assert check_enforcing(s.graph, with_depth=False).enforcing


def test_two_key_one_hop():
    s = two_key_one_hop(16)
    assert s.depth() == 1
    assert s.graph.edge_count <= F.two_key_one_hop_bound(16)
    assert s.cover(R((3, 14))) == [R((3, 8)), R((9, 14))]


def test_default_three_key_factors():
    assert default_three_key_factors(36) == (6, 2, 3)
    assert default_three_key_factors(64) == (8, 2, 2, 2)
    assert default_three_key_factors(6) == (2, 3)
    with pytest.raises(InvalidScheduleError):
        default_three_key_factors(13)


def test_three_key_example():
    s = three_key(36, (6, 6))
    assert s.graph.edge_count == 210
    assert s.cover(R((3, 25))) == [R((3, 6)), R((7, 24)), R((25, 25))]
    assert s.graph.edge_count <= F.three_key_bound(36)
    with pytest.raises(InvalidScheduleError):
        three_key(36, (5, 7))


def test_four_key_factor_rule():
    assert four_key_factor(16) == 4
    assert four_key_factors(16) == (4, 2, 2)
    assert four_key_factor(7) == 7
    with pytest.raises(ValueError):
        four_key_factor(1)


def test_four_key_16():
    s = four_key(16)
    assert s.graph.edge_count == 44
    assert s.graph.edge_count <= F.four_key_bound(16) == 288


@pytest.mark.parametrize("scheme", [two_key(16), three_key(36, (6, 6)), three_key(24), four_key(16), four_key(27)])
def test_covers_exhaustive(scheme):
    for label in scheme.space:
        assert cover_problems(scheme, label) == []


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_cover_parts_are_special_and_tile_label(data):
    m = data.draw(st.sampled_from([8, 32, 64]))
    s = data.draw(st.sampled_from([two_key, four_key]))(m)
    label = data.draw(interval(m))
    parts = s.cover(label)
    assert 1 <= len(parts) <= s.max_keys
    points = sorted(p for part in parts for p in range(part[0].lo, part[0].hi + 1))
    assert points == list(range(label[0].lo, label[0].hi + 1))
    assert all(p.is_leaf or s.is_special(p) for p in parts)


def test_multikey_graphs_against_naive_oracle(oracle):
    for s in (two_key(8), three_key(12), four_key(8)):
        assert oracle(s.graph) == []
