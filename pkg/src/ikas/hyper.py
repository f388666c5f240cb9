"""Hypercube constructions over ``T_n^k``.

At every scale the cube is halved in each dimension. A hyperrectangle lying
inside one cell of the current scale but straddling the halving point in
``d`` dimensions gets ``2**d`` edges, one to its intersection with each
sub-cube it meets. Everything else is left to finer scales.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import HyperRect, PolicySpace, interval_index
from .graph import DerivationGraph
from .multikey import SpecialNodeScheme, is_power_of_two


class InvalidParameterError(ValueError):
    pass


def _check(n: int, k: int) -> None:
    if k < 1:
        raise InvalidParameterError(f"dimension must be at least 1, got {k}")
    if not is_power_of_two(n):
        raise InvalidParameterError(f"n must be a power of two, got {n}")


@dataclass(frozen=True)
class EndpointSignature:
    """Which sub-cube holds each corner of a hyperrectangle.

    Bit ``i`` of ``lower`` (``upper``) is 1 when the low (high) end of
    dimension ``i`` lies in the upper half.
    """

    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ValueError("corner strings differ in length")
        if any(a > b for a, b in zip(self.lower, self.upper)):
            raise ValueError("lower corner bit exceeds upper corner bit")

    @classmethod
    def of(cls, rect: HyperRect, origin: Sequence[int] | None = None, size: int | None = None):
        """Signature of ``rect`` relative to the cell ``origin + [1, size]^k``."""
        k = len(rect)
        origin = tuple(origin) if origin is not None else (0,) * k
        if size is None:
            raise ValueError("cell size is required")
        half = size // 2
        lower = tuple(int(iv.lo - o > half) for iv, o in zip(rect, origin))
        upper = tuple(int(iv.hi - o > half) for iv, o in zip(rect, origin))
        return cls(lower, upper)

    @property
    def hamming(self) -> int:
        return sum(a != b for a, b in zip(self.lower, self.upper))

    def __str__(self) -> str:
        bits = lambda t: "".join(map(str, t))  # noqa: E731
        return f"{bits(self.lower)}/{bits(self.upper)}"


def _level_intervals(n: int, size: int):
    """Intervals of ``[1, n]`` that sit inside one cell of width ``size``.

    Returns ``(straddling, contained)``: the first as ``(rank, left_child,
    right_child)`` rank arrays, the second as a rank array.
    """
    half = size // 2
    lo, hi = np.triu_indices(size)
    lo, hi = lo + 1, hi + 1
    starts = np.arange(0, n, size)[:, None]
    straddle = (lo <= half) & (hi > half)
    slo, shi = (lo[straddle] + starts).ravel(), (hi[straddle] + starts).ravel()
    mid = (np.broadcast_to(half, straddle.sum()) + starts).ravel()
    clo, chi = (lo[~straddle] + starts).ravel(), (hi[~straddle] + starts).ravel()
    return (
        (
            interval_index(slo, shi, n),
            interval_index(slo, mid, n),
            interval_index(mid + 1, shi, n),
        ),
        interval_index(clo, chi, n),
    )


def _outer_sum(arrays: list[np.ndarray]) -> np.ndarray:
    out = arrays[0]
    for a in arrays[1:]:
        out = np.add.outer(out, a)
    return out.ravel()


def hypercube_edges(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    space = PolicySpace.cube(n, k)
    strides = space.strides
    parents, children = [], []
    size = n
    while size >= 2:
        (srank, left, right), crank = _level_intervals(n, size)
        for mask in itertools.product((False, True), repeat=k):
            if not any(mask):
                continue
            pcols = [(srank if s else crank) * st for s, st in zip(mask, strides)]
            p = _outer_sum(pcols)
            for choice in itertools.product((0, 1), repeat=sum(mask)):
                it = iter(choice)
                ccols = [
                    ((right if next(it) else left) if s else crank) * st
                    for s, st in zip(mask, strides)
                ]
                parents.append(p)
                children.append(_outer_sum(ccols))
        size //= 2
    if not parents:
        z = np.zeros(0, dtype=np.int64)
        return z, z
    return np.concatenate(parents), np.concatenate(children)


def hypercube(n: int, k: int) -> DerivationGraph:
    _check(n, k)
    parents, children = hypercube_edges(n, k)
    return DerivationGraph(
        PolicySpace.cube(n, k), parents, children, construction="hyper", params={"n": n, "k": k}
    )


def recurrence_solver(k: int, coefficients: Sequence[int], n: int) -> int:
    """Solve ``f(n) - 2^k f(n/2) = (n/2)^k * sum_i a_i (n/2)^i`` with ``f(1) = 0``."""
    if not is_power_of_two(n):
        raise InvalidParameterError(f"n must be a power of two, got {n}")
    if n == 1:
        return 0
    log_n = n.bit_length() - 1
    acc = Fraction(coefficients[0] * log_n) if coefficients else Fraction(0)
    for i, a in enumerate(coefficients[1:], start=1):
        acc += Fraction(a * (n**i - 1), 2**i - 1)
    total = Fraction(n, 2) ** k * acc
    if total.denominator != 1:
        raise ValueError("recurrence has no integer solution for these coefficients")
    return int(total)


def hypercube_recurrence_coefficients(k: int) -> list[int]:
    """Per-scale edge count is ``m^k * ((3m+1)^k - (m+1)^k)``; its coefficients in ``m``."""
    return [0] + [math.comb(k, i) * (3**i - 1) for i in range(1, k + 1)]


# -- 2^k keys -------------------------------------------------------------------


def special_mask(space: PolicySpace) -> np.ndarray:
    """Non-leaf nodes inside one sub-cube of some scale that touch that
    scale's halving point.
    """
    n = space.extents[0]
    lo, hi = space.coords(np.arange(space.size))
    leaf = np.all(lo == hi, axis=1)
    mask = np.zeros(space.size, dtype=bool)
    size = n
    while size >= 2:
        half = size // 2
        cell = (lo - 1) // size
        same_cell = np.all(cell == (hi - 1) // size, axis=1)
        rel_lo, rel_hi = lo - 1 - cell * size, hi - 1 - cell * size
        same_half = np.all((rel_lo < half) == (rel_hi < half), axis=1)
        touches = np.any((rel_hi == half - 1) | (rel_lo == half), axis=1)
        mask |= same_cell & same_half & touches
        size //= 2
    return mask & ~leaf


def subcube_cover(label: HyperRect, n: int, is_special) -> list[HyperRect]:
    """Split ``label`` along the first scale at which it leaves a sub-cube."""
    if label.is_leaf or is_special(label):
        return [label]
    origin = [0] * len(label)
    size = n
    while size >= 2:
        half = size // 2
        cuts = [o + half for o in origin]
        straddle = [iv.lo <= c < iv.hi for iv, c in zip(label, cuts)]
        if any(straddle):
            pieces = [
                [(iv.lo, c), (c + 1, iv.hi)] if s else [(iv.lo, iv.hi)]
                for iv, c, s in zip(label, cuts, straddle)
            ]
            return [HyperRect(p) for p in itertools.product(*pieces)]
        origin = [c if iv.lo > c else o for iv, c, o in zip(label, cuts, origin)]
        size = half
    return [label]


def induced_scheme(
    graph: DerivationGraph, mask: np.ndarray, *, construction: str, params: dict, max_keys: int
) -> SpecialNodeScheme:
    """Keep the edges leaving special nodes; every such child must be
    special or a leaf."""
    space = graph.space
    n = space.extents[0]
    nodes = np.flatnonzero(mask | space.leaf_mask())
    keep = mask[graph.parents]
    sub = DerivationGraph(
        space,
        graph.parents[keep],
        graph.children[keep],
        construction=construction,
        params=params,
        nodes=nodes,
    )
    stray = np.setdiff1d(sub.children, nodes)
    if len(stray):
        raise AssertionError(f"{construction}: edge into non-special node {space.rect(int(stray[0]))}")

    def is_special(rect: HyperRect) -> bool:
        return bool(mask[space.index(rect)])

    return SpecialNodeScheme(sub, max_keys, lambda label: subcube_cover(label, n, is_special))


def hypercube_multikey(n: int, k: int) -> SpecialNodeScheme:
    _check(n, k)
    space = PolicySpace.cube(n, k)
    return induced_scheme(
        hypercube(n, k),
        special_mask(space),
        construction="hyper-multikey",
        params={"n": n, "k": k},
        max_keys=2**k,
    )
