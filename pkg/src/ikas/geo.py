"""Rectangle constructions over two-dimensional grids.

``square_grid`` quarters the grid recursively. Within a cell, a rectangle
whose corners fall in four different quadrants links to its four quadrant
intersections; one whose corners fall in two adjacent quadrants links to two.
Rectangles inside a single quadrant are left to the next scale.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import PolicySpace
from .graph import DerivationGraph
from .hyper import induced_scheme, special_mask
from .multikey import SpecialNodeScheme, _split_point, is_power_of_two

E1 = "E1"
E2 = "E2"

# (x_lo, x_hi, y_lo, y_hi) for parent and child, relative to a cell
RectPattern = tuple[np.ndarray, ...]


def _require_power_of_two(n: int, what: str = "n") -> None:
    if not is_power_of_two(n):
        raise ValueError(f"{what} must be a power of two, got {n}")


@lru_cache(maxsize=None)
def _cell_pattern(size: int) -> RectPattern:
    half = size // 2
    lo, hi = np.triu_indices(size)
    lo, hi = lo + 1, hi + 1
    cross = (lo <= half) & (hi > half)
    s_lo, s_hi = lo[cross], hi[cross]
    w_lo, w_hi = lo[~cross], hi[~cross]
    # the two halves of each crossing interval
    pieces = [(s_lo, np.full_like(s_lo, half)), (np.full_like(s_hi, half + 1), s_hi)]

    cols: list[list[np.ndarray]] = [[] for _ in range(8)]

    def emit(px, py, cx, cy):
        for col, arr in zip(cols, (*px, *py, *cx, *cy)):
            col.append(arr.ravel())

    def grid(a, b):
        """All pairs (a_i, b_j) as flat arrays."""
        return np.repeat(a, len(b)), np.tile(b, len(a))

    # corners in four quadrants
    for cx in pieces:
        for cy in pieces:
            ix, iy = grid(np.arange(len(s_lo)), np.arange(len(s_lo)))
            emit((s_lo[ix], s_hi[ix]), (s_lo[iy], s_hi[iy]), (cx[0][ix], cx[1][ix]), (cy[0][iy], cy[1][iy]))
    # corners in two quadrants side by side, then one above the other
    for cx in pieces:
        ix, iy = grid(np.arange(len(s_lo)), np.arange(len(w_lo)))
        emit((s_lo[ix], s_hi[ix]), (w_lo[iy], w_hi[iy]), (cx[0][ix], cx[1][ix]), (w_lo[iy], w_hi[iy]))
    for cy in pieces:
        ix, iy = grid(np.arange(len(w_lo)), np.arange(len(s_lo)))
        emit((w_lo[ix], w_hi[ix]), (s_lo[iy], s_hi[iy]), (w_lo[ix], w_hi[ix]), (cy[0][iy], cy[1][iy]))
    return tuple(np.concatenate(c) for c in cols)


def _square_rects(n: int, x0: int = 0, y0: int = 0) -> RectPattern:
    """Square-grid edges for the ``n x n`` grid whose corner is at ``(x0, y0)``."""
    out: list[list[np.ndarray]] = [[] for _ in range(8)]
    size = n
    while size >= 2:
        pat = _cell_pattern(size)
        offs = np.arange(0, n, size)
        ox, oy = np.repeat(offs, len(offs)), np.tile(offs, len(offs))
        for i, col in enumerate(pat):
            shift = (ox if i in (0, 1, 4, 5) else oy) + (x0 if i in (0, 1, 4, 5) else y0)
            out[i].append((col[None, :] + shift[:, None]).ravel())
        size //= 2
    if not out[0]:
        return tuple(np.zeros(0, dtype=np.int64) for _ in range(8))
    return tuple(np.concatenate(c) for c in out)


def _graph(space: PolicySpace, cols: RectPattern, construction: str, params: dict) -> DerivationGraph:
    px, phx, py, phy, cx, chx, cy, chy = cols
    parents = space.indices(np.stack([px, py], axis=1), np.stack([phx, phy], axis=1))
    children = space.indices(np.stack([cx, cy], axis=1), np.stack([chx, chy], axis=1))
    return DerivationGraph(space, parents, children, construction=construction, params=params)


def square_grid(n: int) -> DerivationGraph:
    _require_power_of_two(n)
    return _graph(PolicySpace((n, n)), _square_rects(n), "square", {"n": n})


def _spanning_children(m: int, k: int, variant: str):
    """Second-dimension intervals crossing a block boundary and the pieces
    each one links to."""
    rows = []
    km = k * m
    block = lambda v: (v - 1) // m  # noqa: E731
    for lo in range(1, km + 1):
        for hi in range(lo + 1, km + 1):
            i, j = block(lo), block(hi)
            if i == j:
                continue
            if variant == E1:
                for z in range(i, j + 1):
                    rows.append((lo, hi, max(lo, z * m + 1), min(hi, (z + 1) * m)))
            else:
                a, b = 1, k
                while True:
                    mid = _split_point(a, b)
                    if i + 1 <= mid < j + 1:
                        break
                    a, b = (a, mid) if j + 1 <= mid else (mid + 1, b)
                rows.append((lo, hi, lo, mid * m))
                rows.append((lo, hi, mid * m + 1, hi))
    if not rows:
        return tuple(np.zeros(0, dtype=np.int64) for _ in range(4))
    return tuple(np.array(c, dtype=np.int64) for c in zip(*rows))


def rect_grid(m: int, k: int, variant: str = E2) -> DerivationGraph:
    """``m x km`` grid: ``k`` square-grid blocks side by side plus links from
    every rectangle spanning several blocks.

    ``E1`` links a spanning rectangle to its piece in every block it meets;
    ``E2`` halves the run of blocks recursively.
    """
    _require_power_of_two(m, "m")
    if k < 1:
        raise ValueError(f"block count must be at least 1, got {k}")
    variant = variant.upper()
    if variant not in (E1, E2):
        raise ValueError(f"unknown variant {variant!r}")
    space = PolicySpace((m, k * m))
    parts = [_square_rects(m, 0, z * m) for z in range(k)]

    plo, phi, clo, chi = _spanning_children(m, k, variant)
    xlo, xhi = np.triu_indices(m)
    xlo, xhi = xlo + 1, xhi + 1
    nx, ny = len(xlo), len(plo)
    rx = np.repeat(np.arange(nx), ny)
    ry = np.tile(np.arange(ny), nx)
    parts.append((xlo[rx], xhi[rx], plo[ry], phi[ry], xlo[rx], xhi[rx], clo[ry], chi[ry]))
    cols = tuple(np.concatenate(c) for c in zip(*parts))
    name = "rect-e1" if variant == E1 else "rect-e2"
    return _graph(space, cols, name, {"m": m, "k": k})


def geo_multikey(n: int) -> SpecialNodeScheme:
    """Four keys per user over the ``n x n`` grid."""
    _require_power_of_two(n)
    space = PolicySpace((n, n))
    return induced_scheme(
        square_grid(n), special_mask(space), construction="geo-4key", params={"n": n}, max_keys=4
    )
