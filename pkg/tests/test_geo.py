import pytest

from ikas import formulas as F
from ikas.core import HyperRect, PolicySpace
from ikas.geo import E1, E2, geo_multikey, rect_grid, square_grid
from ikas.graph import derivation_depth
from ikas.hyper import hypercube, hypercube_multikey, special_mask
from ikas.verify import check_enforcing, cover_problems

R = HyperRect.of


def test_square_n2():
    g = square_grid(2)
    assert g.edge_count == 12
    assert g.children_of(R((1, 2), (1, 2))) == [R((1, 1), (1, 1)), R((1, 1), (2, 2)), R((2, 2), (1, 1)), R((2, 2), (2, 2))]
    assert g.children_of(R((1, 2), (1, 1))) == [R((1, 1), (1, 1)), R((2, 2), (1, 1))]


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_square_closed_form_and_bound(n):
    g = square_grid(n)
    assert g.edge_count == F.square_edges(n)
    assert g.edge_count < F.square_bound(n)


def test_square_equals_two_dimensional_hypercube():
    for n in (2, 4, 8):
        assert square_grid(n).edge_set() == hypercube(n, 2).edge_set()


@pytest.mark.parametrize("m", [2, 4, 8])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_rect_closed_forms(m, k):
    e1, e2 = rect_grid(m, k, E1), rect_grid(m, k, E2)
    assert e1.edge_count == F.rect_e1_edges(m, k)
    assert e2.edge_count == F.rect_e2_edges(m, k)
    assert e2.edge_count < F.rect_e2_bound(m, k)
    assert e1.space == PolicySpace((m, k * m))


def test_rect_depths():
    assert derivation_depth(rect_grid(4, 3, E1)) == 3
    assert derivation_depth(rect_grid(4, 4, E2)) == 4


def test_rect_rejects_bad_arguments():
    with pytest.raises(ValueError):
        rect_grid(6, 2)
    with pytest.raises(ValueError):
        rect_grid(4, 0)
    with pytest.raises(ValueError):
        rect_grid(4, 2, "E3")


def test_rect_small_against_naive_oracle(oracle):
    for variant in (E1, E2):
        assert oracle(rect_grid(2, 3, variant)) == []


def _touching_center(h):
    """Rectangles of an h x h quadrant touching its two inner sides, leaves included."""
    count = 0
    for a in range(1, h + 1):
        for b in range(a, h + 1):
            for x in range(1, h + 1):
                for y in range(x, h + 1):
                    count += b == h or y == h
    return count


def test_special_nodes_per_quadrant():
    assert [_touching_center(h) for h in (1, 2, 4)] == [1, 8, 64]
    space = PolicySpace((4, 4))
    mask = special_mask(space)
    assert int(mask.sum()) == 20
    # top scale: in each quadrant, the m^3 touching nodes minus the corner leaf
    assert int(mask.sum()) <= 4 * (_touching_center(2) - 1) + 4 * 4 * (_touching_center(1) - 1)
    assert int(special_mask(PolicySpace((8, 8))).sum()) <= F.geo_special_bound(8)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_geo_multikey(n):
    s = geo_multikey(n)
    assert s.component_count() == 4
    assert s.graph.edge_count <= F.geo_multikey_bound(n)
    assert check_enforcing(s.graph, with_depth=False).enforcing
    assert s.graph.edge_set() == hypercube_multikey(n, 2).graph.edge_set()


def test_geo_cover_example():
    s = geo_multikey(8)
    parts = s.cover(R((3, 6), (2, 7)))
    assert len(parts) == 4
    assert parts[0] == R((3, 4), (2, 4))
    assert all(cover_problems(s, label) == [] for label in s.space)
