import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ikas import formulas as F
from ikas.core import HyperRect
from ikas.graph import derivation_depth
from ikas.hyper import (
    EndpointSignature,
    InvalidParameterError,
    hypercube,
    hypercube_multikey,
    hypercube_recurrence_coefficients,
    recurrence_solver,
    special_mask,
    subcube_cover,
)
from ikas.temporal import binary_decomposition
from ikas.verify import check_enforcing, cover_problems

R = HyperRect.of


def _brute_hypercube_count(n, k):
    """Per scale and cell: each box whose corners sit in one cell links to the
    product of its per-dimension halves (split where it straddles)."""
    total = 0
    size = n
    while size >= 2:
        half = size // 2
        per_dim = [(lo, hi) for lo in range(1, size + 1) for hi in range(lo, size + 1)]
        cells = (n // size) ** k
        for box in itertools.product(per_dim, repeat=k):
            straddles = sum(lo <= half < hi for lo, hi in box)
            if straddles:
                total += cells * 2**straddles
        size //= 2
    return total


@pytest.mark.parametrize("k,n", [(1, 8), (2, 4), (2, 8), (3, 2), (3, 4)])
def test_counts_against_brute_force(k, n):
    assert hypercube(n, k).edge_count == _brute_hypercube_count(n, k)


def test_k3_n2_is_56():
    assert hypercube(2, 3).edge_count == 56


@pytest.mark.parametrize("k", [1, 2, 3])
def test_recurrence_matches_formula(k):
    coeffs = hypercube_recurrence_coefficients(k)
    for n in (1, 2, 4, 8, 16):
        expected = F.hypercube_edges(n, k) if n > 1 else 0
        assert recurrence_solver(k, coeffs, n) == expected


def test_recurrence_coefficients():
    assert hypercube_recurrence_coefficients(2) == [0, 4, 8]
    # a_0 term: f(n) = 2 f(n/2) + n has f(n) = n log n
    assert recurrence_solver(1, [2], 8) == 8 * 3
    with pytest.raises(InvalidParameterError):
        recurrence_solver(1, [0, 2], 6)


def test_k1_is_binary_decomposition():
    assert hypercube(16, 1).edge_set() == binary_decomposition(16).edge_set()


def test_parameter_checks():
    with pytest.raises(InvalidParameterError):
        hypercube(6, 2)
    with pytest.raises(InvalidParameterError):
        hypercube(4, 0)


def test_depth_is_log_n():
    assert derivation_depth(hypercube(8, 2)) == 3
    assert derivation_depth(hypercube(4, 3)) == 2


def test_endpoint_signature():
    sig = EndpointSignature.of(R((3, 6), (1, 2)), size=8)
    assert (sig.lower, sig.upper, sig.hamming) == ((0, 0), (1, 0), 1)
    assert str(sig) == "00/10"
    with pytest.raises(ValueError):
        EndpointSignature((1,), (0,))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_subcube_cover_splits_into_at_most_2k(data):
    k = data.draw(st.integers(1, 3))
    n = 8
    pairs = []
    for _ in range(k):
        lo = data.draw(st.integers(1, n))
        pairs.append((lo, data.draw(st.integers(lo, n))))
    label = HyperRect(pairs)
    parts = subcube_cover(label, n, lambda r: False)
    assert len(parts) <= 2**k
    assert sum(p.volume for p in parts) == label.volume
    assert all(label.covers(p) for p in parts)


@pytest.mark.parametrize("n,k", [(2, 2), (4, 2), (8, 2), (2, 3), (4, 3)])
def test_hypercube_multikey(n, k):
    s = hypercube_multikey(n, k)
    assert s.component_count() == 2**k
    assert s.graph.edge_count <= F.hypercube_multikey_bound(n, k)
    assert check_enforcing(s.graph, with_depth=False).enforcing
    assert all(cover_problems(s, label) == [] for label in s.space)


def test_special_mask_excludes_leaves():
    s = hypercube_multikey(4, 2)
    mask = special_mask(s.space)
    assert not mask[s.space.leaf_indices()].any()
