"""Multi-key temporal schemes.

A user holding ``c`` keys can be issued a few *special* nodes whose union is
their interval instead of the interval's own node. Only special nodes (and
all leaves) carry key material, which is what makes these graphs sparse.

Three- and four-key schemes share a block hierarchy: a segment of length
``L`` with factors ``(a, ...)`` is cut into ``a`` equal blocks, each of which
is again a segment with the remaining factors. Every special node is split
by one rule, applied at the first level where the node spans two blocks:

* both ends block-aligned: binary split over block indices;
* only the right end aligned (a suffix): the partial first block and the
  aligned remainder;
* only the left end aligned (a prefix): the mirror image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .core import HyperRect, PolicySpace, interval_index
from .graph import DerivationGraph, component_count, derivation_depth, stats
from .temporal import InvalidScheduleError, binary_decomposition_pattern


class NotPowerOfTwoError(ValueError):
    pass


@dataclass
class SpecialNodeScheme:
    """An induced subgraph on special nodes plus a cover function.

    ``cover(label)`` returns at most ``max_keys`` pairwise disjoint special
    nodes whose union is ``label``.
    """

    graph: DerivationGraph
    max_keys: int
    cover_fn: Callable[[HyperRect], list[HyperRect]] = field(repr=False)

    @property
    def space(self) -> PolicySpace:
        return self.graph.space

    @property
    def name(self) -> str:
        return self.graph.construction

    @cached_property
    def special(self) -> frozenset[HyperRect]:
        rect = self.space.rect
        return frozenset(rect(int(i)) for i in self.graph.nodes)

    def is_special(self, node: HyperRect) -> bool:
        if node not in self.space:
            return False
        idx = self.space.index(node)
        nodes = self.graph.nodes
        j = np.searchsorted(nodes, idx)
        return bool(j < len(nodes) and nodes[j] == idx)

    def cover(self, label: HyperRect) -> list[HyperRect]:
        if label not in self.space:
            raise ValueError(f"{label!r} lies outside {self.space}")
        return self.cover_fn(label)

    def depth(self) -> int:
        return derivation_depth(self.graph)

    def component_count(self) -> int:
        return component_count(self.graph)

    def stats(self):
        return stats(self.graph)


def is_power_of_two(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


def _require_power_of_two(m: int) -> None:
    if not is_power_of_two(m):
        raise NotPowerOfTwoError(f"{m} is not a power of two")


# -- two keys ------------------------------------------------------------------


def _split_point(lo: int, hi: int) -> int:
    """Last point of the left half of ``[lo, hi]``."""
    return lo + (hi - lo + 1) // 2 - 1


def two_key_ranges(lo: int, hi: int) -> set[tuple[int, int]]:
    """Non-leaf special ranges of the two-key marking over ``[lo, hi]``.

    At each split, every range ending at the split point and every range
    starting right after it is special; the halves are marked recursively.
    """
    out: set[tuple[int, int]] = set()
    stack = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo + 1 < 2:
            continue
        mid = _split_point(lo, hi)
        out.update((x, mid) for x in range(lo, mid))
        out.update((mid + 1, y) for y in range(mid + 2, hi + 1))
        stack.append((lo, mid))
        stack.append((mid + 1, hi))
    return out


def two_key_cover_range(lo: int, hi: int, x: int, y: int, special: set[tuple[int, int]]):
    """At most two special ranges (or single points) that tile ``[x, y]``."""
    while True:
        if x == y or (x, y) in special:
            return [(x, y)]
        mid = _split_point(lo, hi)
        if x <= mid < y:
            return [(x, mid), (mid + 1, y)]
        if y <= mid:
            hi = mid
        else:
            lo = mid + 1


def _interval_scheme(
    m: int,
    special: set[tuple[int, int]],
    plo: np.ndarray,
    phi: np.ndarray,
    clo: np.ndarray,
    chi: np.ndarray,
    *,
    construction: str,
    params: dict,
    max_keys: int,
    cover: Callable[[int, int], list[tuple[int, int]]],
) -> SpecialNodeScheme:
    space = PolicySpace((m,))
    points = np.arange(1, m + 1)
    if special:
        slo, shi = (np.array(v, dtype=np.int64) for v in zip(*sorted(special)))
    else:
        slo = shi = np.zeros(0, dtype=np.int64)
    nodes = np.concatenate([interval_index(points, points, m), interval_index(slo, shi, m)])
    graph = DerivationGraph(
        space,
        interval_index(plo, phi, m),
        interval_index(clo, chi, m),
        construction=construction,
        params=params,
        nodes=nodes,
    )
    missing = np.setdiff1d(graph.children, graph.nodes)
    if len(missing):
        raise AssertionError(f"{construction}: edge into non-special node {space.rect(int(missing[0]))}")

    def cover_fn(label: HyperRect) -> list[HyperRect]:
        (iv,) = label
        return [HyperRect.of(p) for p in cover(iv.lo, iv.hi)]

    return SpecialNodeScheme(graph, max_keys, cover_fn)


def two_key(m: int) -> SpecialNodeScheme:
    """Two keys per user; the graph splits into two components of depth ``log m - 1``."""
    _require_power_of_two(m)
    special = two_key_ranges(1, m)
    plo, phi, clo, chi = binary_decomposition_pattern(m)
    keep = np.array([(p, q) in special for p, q in zip(plo.tolist(), phi.tolist())], dtype=bool)
    return _interval_scheme(
        m,
        special,
        plo[keep],
        phi[keep],
        clo[keep],
        chi[keep],
        construction="2key",
        params={"m": m},
        max_keys=2,
        cover=lambda x, y: two_key_cover_range(1, m, x, y, special),
    )


def two_key_one_hop(m: int) -> SpecialNodeScheme:
    """Same special nodes as :func:`two_key`, each wired straight to its leaves."""
    _require_power_of_two(m)
    special = two_key_ranges(1, m)
    rows = [(x, y, t) for x, y in sorted(special) for t in range(x, y + 1)]
    if rows:
        plo, phi, pts = (np.array(c, dtype=np.int64) for c in zip(*rows))
    else:
        plo = phi = pts = np.zeros(0, dtype=np.int64)
    return _interval_scheme(
        m,
        special,
        plo,
        phi,
        pts,
        pts,
        construction="2key-1hop",
        params={"m": m},
        max_keys=2,
        cover=lambda x, y: two_key_cover_range(1, m, x, y, special),
    )


# -- block hierarchy (three and four keys) --------------------------------------------


class _BlockHierarchy:
    """Special nodes, edges and covers for the three- and four-key schemes."""

    def __init__(self, m: int, factors: Sequence[int], keys: int):
        self.m = m
        self.factors = tuple(factors)
        self.keys = keys
        self._ranges: dict[int, set[tuple[int, int]]] = {}
        self.special: set[tuple[int, int]] = set()
        self._mark(1, self.factors, top=True)

    def _index_ranges(self, a: int, top: bool) -> set[tuple[int, int]]:
        key = (a, top)
        if key not in self._ranges:
            if self.keys == 3:
                ranges = {(p, q) for p in range(1, a + 1) for q in range(p, a + 1)}
            else:
                ranges = two_key_ranges(1, a) | {(p, p) for p in range(1, a + 1)}
                if not top:
                    ranges |= {(p, a) for p in range(1, a + 1)}
                    ranges |= {(1, q) for q in range(1, a + 1)}
            self._ranges[key] = ranges
        return self._ranges[key]

    def _mark(self, start: int, fs: tuple[int, ...], top: bool) -> None:
        stack = [(start, fs, top)]
        while stack:
            start, fs, top = stack.pop()
            length = math.prod(fs)
            end = start + length - 1
            if not top:
                self.special.update((x, end) for x in range(start, end + 1))
                self.special.update((start, y) for y in range(start, end + 1))
            if not fs:
                continue
            a, b = fs[0], length // fs[0]
            for p, q in self._index_ranges(a, top):
                self.special.add((start + (p - 1) * b, start + q * b - 1))
            if len(fs) > 1:
                stack.extend((start + i * b, fs[1:], False) for i in range(a))
        self.special = {(x, y) for x, y in self.special if x < y}

    def _locate(self, x: int, y: int):
        """First level at which ``[x, y]`` spans more than one block."""
        start, fs = 1, self.factors
        while True:
            b = math.prod(fs[1:])
            i, j = (x - start) // b, (y - start) // b
            if i != j:
                return start, fs[0], b, i + 1, j + 1
            start, fs = start + i * b, fs[1:]

    def split(self, x: int, y: int) -> list[tuple[int, int]]:
        start, a, b, i, j = self._locate(x, y)
        first = lambda p: start + (p - 1) * b  # noqa: E731
        last = lambda p: start + p * b - 1  # noqa: E731
        x_aligned, y_aligned = x == first(i), y == last(j)
        if x_aligned and y_aligned:
            lo, hi = 1, a
            while True:
                mid = _split_point(lo, hi)
                if i <= mid < j:
                    return [(x, last(mid)), (first(mid + 1), y)]
                lo, hi = (lo, mid) if j <= mid else (mid + 1, hi)
        if y_aligned:
            return [(x, last(i)), (first(i + 1), y)]
        if x_aligned:
            return [(x, last(j - 1)), (first(j), y)]
        raise AssertionError(f"[{x},{y}] is not a special node")

    def cover(self, x: int, y: int) -> list[tuple[int, int]]:
        if x == y or (x, y) in self.special:
            return [(x, y)]
        start, a, b, i, j = self._locate(x, y)
        first = lambda p: start + (p - 1) * b  # noqa: E731
        last = lambda p: start + p * b - 1  # noqa: E731
        parts = []
        lo = i if x == first(i) else i + 1
        hi = j if y == last(j) else j - 1
        if lo > i:
            parts.append((x, last(i)))
        if lo <= hi:
            if self.keys == 3:
                parts.append((first(lo), last(hi)))
            else:
                for p, q in two_key_cover_range(1, a, lo, hi, self._index_ranges(a, start == 1 and b * a == self.m)):
                    parts.append((first(p), last(q)))
        if hi < j:
            parts.append((first(j), y))
        return parts

    def scheme(self, construction: str, params: dict) -> SpecialNodeScheme:
        rows = []
        for x, y in sorted(self.special):
            for c in self.split(x, y):
                rows.append((x, y) + c)
        if rows:
            cols = [np.array(c, dtype=np.int64) for c in zip(*rows)]
        else:
            cols = [np.zeros(0, dtype=np.int64)] * 4
        return _interval_scheme(
            self.m,
            self.special,
            *cols,
            construction=construction,
            params=params,
            max_keys=self.keys,
            cover=self.cover,
        )


def default_three_key_factors(m: int) -> tuple[int, ...]:
    """Repeatedly peel off the largest divisor not exceeding the square root."""
    if m < 2:
        raise InvalidScheduleError("three_key needs m >= 2")
    factors = []
    rest = m
    while rest > 1:
        a = next((d for d in range(math.isqrt(rest), 1, -1) if rest % d == 0), None)
        if a is None:
            if rest == m:
                raise InvalidScheduleError(f"{m} is prime and cannot be factored")
            factors.append(rest)
            break
        factors.append(a)
        rest //= a
    return tuple(factors)


def three_key(m: int, factors: Sequence[int] | None = None) -> SpecialNodeScheme:
    if factors is None:
        factors = default_three_key_factors(m)
    factors = tuple(int(a) for a in getattr(factors, "factors", factors))
    if not factors or any(a < 2 for a in factors):
        raise InvalidScheduleError(f"every factor must be at least 2: {factors}")
    if math.prod(factors) != m:
        raise InvalidScheduleError(f"product of {factors} is {math.prod(factors)}, not {m}")
    return _BlockHierarchy(m, factors, keys=3).scheme("3key", {"m": m, "factors": factors})


def four_key_factor(length: int) -> int:
    """Divisor of ``length`` (at least 2) nearest to ``length / log2(length)``."""
    if length < 2:
        raise ValueError("a segment of one point has no split")
    target = length / math.log2(length)
    divisors = [d for d in range(2, length + 1) if length % d == 0]
    return min(divisors, key=lambda d: (abs(d - target), -d))


def four_key_factors(m: int) -> tuple[int, ...]:
    factors = []
    while m > 1:
        a = four_key_factor(m)
        factors.append(a)
        m //= a
    return tuple(factors)


def four_key(m: int) -> SpecialNodeScheme:
    if m < 1:
        raise ValueError("m must be positive")
    factors = four_key_factors(m)
    return _BlockHierarchy(m, factors, keys=4).scheme("4key", {"m": m})
