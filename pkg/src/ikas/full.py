"""Schemes in which every node, not only every leaf, is a derivation target.

The diamond of side ``m`` inside ``T_{2m}`` is the set of intervals ``[x, y]``
with ``x`` in the lower half and ``y`` in the upper half. It is a grid poset:
raising ``x`` or lowering ``y`` moves down. Splitting both axes gives four
quadrants, labelled ``(i, j)`` with ``i = 1`` for the low ``x`` half and
``j = 1`` for the high ``y`` half, so ``(1, 1)`` holds the largest nodes and
``(0, 0)`` the smallest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import HyperRect, PolicySpace, interval_index
from .graph import ALL_NODES, DerivationGraph
from .multikey import is_power_of_two


def _require_power_of_two(m: int) -> None:
    if not is_power_of_two(m):
        raise ValueError(f"m must be a power of two, got {m}")


@dataclass(frozen=True)
class DiamondGrid:
    """The diamond of side ``m`` whose lower corner is ``(x0 + 1, y0 + 1)``."""

    m: int
    x0: int = 0
    y0: int | None = None

    @property
    def y_origin(self) -> int:
        return self.m if self.y0 is None else self.y0

    def nodes(self) -> list[HyperRect]:
        y0 = self.y_origin
        return [
            HyperRect.of((x, y))
            for x in range(self.x0 + 1, self.x0 + self.m + 1)
            for y in range(y0 + 1, y0 + self.m + 1)
        ]

    def __contains__(self, node: HyperRect) -> bool:
        (iv,) = node
        y0 = self.y_origin
        return self.x0 < iv.lo <= self.x0 + self.m and y0 < iv.hi <= y0 + self.m

    def quadrant(self, node: HyperRect) -> tuple[int, int]:
        if node not in self:
            raise ValueError(f"{node!r} is not in this diamond")
        (iv,) = node
        half = self.m // 2
        return int(iv.lo <= self.x0 + half), int(iv.hi > self.y_origin + half)

    def hasse_edges(self) -> list[tuple[HyperRect, HyperRect]]:
        """Covering pairs of the grid: one step in ``x`` or in ``y``."""
        out = []
        for node in self.nodes():
            (iv,) = node
            if iv.lo < self.x0 + self.m:
                out.append((node, HyperRect.of((iv.lo + 1, iv.hi))))
            if iv.hi > self.y_origin + 1:
                out.append((node, HyperRect.of((iv.lo, iv.hi - 1))))
        return out


@lru_cache(maxsize=None)
def _diamond_pattern(side: int):
    """Edges added at one scale, relative to a diamond whose coordinates run 1..side."""
    h = side // 2
    x, y = np.meshgrid(np.arange(1, side + 1), np.arange(1, side + 1), indexing="ij")
    x, y = x.ravel(), y.ravel()
    top = (x <= h) & (y > h)
    left = (x <= h) & (y <= h)
    right = (x > h) & (y > h)
    px = np.concatenate([x[top], x[top], x[left], x[right]])
    py = np.concatenate([y[top], y[top], y[left], y[right]])
    cx = np.concatenate([x[top], np.full(top.sum(), h + 1), np.full(left.sum(), h + 1), x[right]])
    cy = np.concatenate([np.full(top.sum(), h), y[top], y[left], np.full(right.sum(), h)])
    return px, py, cx, cy


def _diamond_edges(m: int, x0: int, y0: int) -> list[tuple[np.ndarray, ...]]:
    parts = []
    side = m
    while side >= 2:
        px, py, cx, cy = _diamond_pattern(side)
        offs = np.arange(0, m, side)
        ox, oy = np.repeat(offs, len(offs))[:, None], np.tile(offs, len(offs))[:, None]
        parts.append(
            tuple(
                (a[None, :] + o + base).ravel()
                for a, o, base in ((px, ox, x0), (py, oy, y0), (cx, ox, x0), (cy, oy, y0))
            )
        )
        side //= 2
    return parts


def _diamond_nodes(m: int, x0: int, y0: int, n: int) -> np.ndarray:
    x, y = np.meshgrid(np.arange(x0 + 1, x0 + m + 1), np.arange(y0 + 1, y0 + m + 1), indexing="ij")
    return interval_index(x.ravel(), y.ravel(), n)


def _build(n: int, parts, construction: str, params: dict, nodes=None) -> DerivationGraph:
    if parts:
        px, py, cx, cy = (np.concatenate(c) for c in zip(*parts))
    else:
        px = py = cx = cy = np.zeros(0, dtype=np.int64)
    return DerivationGraph(
        PolicySpace((n,)),
        interval_index(px, py, n),
        interval_index(cx, cy, n),
        construction=construction,
        params=params,
        target_set=ALL_NODES,
        nodes=nodes,
    )


def diamond_scheme(m: int) -> DerivationGraph:
    """All-node scheme on the diamond of side ``m`` inside ``T_{2m}``.

    Per scale, each node of the top quadrant links to the largest node below
    it in the left and right quadrants, and each node of those two quadrants
    links to the largest node below it in the bottom quadrant.
    """
    _require_power_of_two(m)
    n = 2 * m
    return _build(
        n,
        _diamond_edges(m, 0, m),
        "diamond",
        {"m": m},
        nodes=_diamond_nodes(m, 0, m, n),
    )


def full_triangle_scheme(m: int) -> DerivationGraph:
    """All-node scheme on ``T_m``: halves recursively, with the diamond
    between the halves wired by :func:`diamond_scheme` and each diamond node
    linked to its largest sub-interval in either half."""
    _require_power_of_two(m)
    if m < 2:
        raise ValueError("m must be at least 2")
    parts = []
    stack = [(0, m)]
    while stack:
        start, length = stack.pop()
        if length < 2:
            continue
        h = length // 2
        x, y = np.meshgrid(np.arange(start + 1, start + h + 1), np.arange(start + h + 1, start + length + 1), indexing="ij")
        x, y = x.ravel(), y.ravel()
        parts.append((x, y, x, np.full_like(x, start + h)))
        parts.append((x, y, np.full_like(y, start + h + 1), y))
        parts.extend(_diamond_edges(h, start, start + h))
        stack.append((start, h))
        stack.append((start + h, h))
    return _build(m, parts, "full-triangle", {"m": m})
