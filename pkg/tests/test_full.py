import pytest

from ikas import formulas as F
from ikas.core import HyperRect
from ikas.full import DiamondGrid, diamond_scheme, full_triangle_scheme
from ikas.graph import ALL_NODES, derivation_depth
from ikas.verify import check_enforcing

R = HyperRect.of


def test_diamond_grid_shape():
    d = DiamondGrid(4)
    nodes = d.nodes()
    assert len(nodes) == 16
    assert nodes[0] == R((1, 5)) and nodes[-1] == R((4, 8))
    assert R((2, 6)) in d and R((5, 6)) not in d
    assert d.quadrant(R((1, 8))) == (1, 1)
    assert d.quadrant(R((4, 5))) == (0, 0)
    with pytest.raises(ValueError):
        d.quadrant(R((5, 6)))


@pytest.mark.parametrize("m", [2, 4, 8])
def test_hasse_edges(m):
    assert len(DiamondGrid(m).hasse_edges()) == 2 * m * (m - 1)


@pytest.mark.parametrize("m", [2, 4, 8, 16])
def test_counts(m):
    d, t = diamond_scheme(m), full_triangle_scheme(m)
    assert d.edge_count == F.diamond_edges(m)
    assert t.edge_count == F.full_triangle_edges(m)
    assert d.target_set == t.target_set == ALL_NODES


def test_full_triangle_m2():
    g = full_triangle_scheme(2)
    assert g.edge_count == 2
    assert set(g.edges()) == {(R((1, 2)), R((1, 1))), (R((1, 2)), R((2, 2)))}


def test_depths():
    assert [derivation_depth(diamond_scheme(m)) for m in (2, 4, 8)] == [2, 4, 6]
    assert [derivation_depth(full_triangle_scheme(m)) for m in (2, 4, 8, 16)] == [1, 2, 4, 6]


def test_diamond_top_scale_links():
    g = diamond_scheme(4)
    # top quadrant node reaches both side quadrants in one hop
    assert set(g.children_of(R((1, 8)))) >= {R((1, 6)), R((3, 8))}


@pytest.mark.parametrize("m", [2, 4, 8])
def test_enforcing_with_all_node_targets(m, oracle):
    assert check_enforcing(diamond_scheme(m)).enforcing
    assert check_enforcing(full_triangle_scheme(m)).enforcing
    assert oracle(diamond_scheme(m)) == []
    assert oracle(full_triangle_scheme(m)) == []


def test_power_of_two_required():
    with pytest.raises(ValueError):
        diamond_scheme(6)
    with pytest.raises(ValueError):
        full_triangle_scheme(12)
