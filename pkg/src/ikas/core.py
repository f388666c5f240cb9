"""Intervals, hyperrectangles and the policy spaces they live in.

Points are 1-based and intervals are closed, so ``Interval(3, 8)`` holds the
six points 3..8. A :class:`PolicySpace` numbers its hyperrectangles in
lexicographic order of ``(lo_1, hi_1, ..., lo_k, hi_k)``; that number is the
node index used by every graph in the package.
"""

from __future__ import annotations

import itertools
import re
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class InvalidSpaceError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class Interval(NamedTuple):
    lo: int
    hi: int

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    @property
    def is_leaf(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"


class HyperRect(tuple):
    """An immutable product of closed intervals, one per dimension."""

    def __new__(cls, intervals: Iterable[Sequence[int]]) -> "HyperRect":
        ivs = tuple(Interval(int(lo), int(hi)) for lo, hi in intervals)
        if not ivs:
            raise InvalidSpaceError("a hyperrectangle needs at least one dimension")
        for iv in ivs:
            if iv.lo < 1 or iv.lo > iv.hi:
                raise ValueError(f"invalid interval {iv}")
        return super().__new__(cls, ivs)

    @classmethod
    def of(cls, *pairs: Sequence[int]) -> "HyperRect":
        """``HyperRect.of((3, 11), (2, 14))``."""
        return cls(pairs)

    @classmethod
    def point(cls, *coords: int) -> "HyperRect":
        return cls((c, c) for c in coords)

    @property
    def k(self) -> int:
        return len(self)

    @property
    def is_leaf(self) -> bool:
        return all(iv.lo == iv.hi for iv in self)

    @property
    def volume(self) -> int:
        v = 1
        for iv in self:
            v *= iv.hi - iv.lo + 1
        return v

    def covers(self, other: "HyperRect") -> bool:
        """Containment (``other`` is a subset of ``self``)."""
        _check_dims(self, other)
        return all(a.lo <= b.lo and b.hi <= a.hi for a, b in zip(self, other))

    def disjoint(self, other: "HyperRect") -> bool:
        _check_dims(self, other)
        return any(a.hi < b.lo or b.hi < a.lo for a, b in zip(self, other))

    def to_bytes(self) -> bytes:
        return encode_node_id(self)

    def __str__(self) -> str:
        return format_node_id(self)

    def __repr__(self) -> str:
        return "HyperRect(" + "x".join(str(iv) for iv in self) + ")"


def _check_dims(a: HyperRect, b: HyperRect) -> None:
    if len(a) != len(b):
        raise DimensionMismatchError(f"dimension {len(a)} != {len(b)}")


def contains(rect: HyperRect, point: HyperRect) -> bool:
    """True iff the all-leaf ``point`` lies inside ``rect``."""
    _check_dims(rect, point)
    if not point.is_leaf:
        raise ValueError(f"{point!r} is not a point")
    return all(r.lo <= p.lo <= r.hi for r, p in zip(rect, point))


def authorized_leaves(rect: HyperRect) -> list[HyperRect]:
    ranges = [range(iv.lo, iv.hi + 1) for iv in rect]
    return [HyperRect.point(*c) for c in itertools.product(*ranges)]


# -- NodeId ------------------------------------------------------------------

_ID_HEADER = struct.Struct(">H")
_ID_PAIR = struct.Struct(">II")
_TEXT_RE = re.compile(r"^d=(\d+);(\d+-\d+(?:,\d+-\d+)*)$")


def encode_node_id(rect: HyperRect) -> bytes:
    out = [_ID_HEADER.pack(len(rect))]
    out.extend(_ID_PAIR.pack(iv.lo, iv.hi) for iv in rect)
    return b"".join(out)


def decode_node_id(data: bytes) -> HyperRect:
    if len(data) < _ID_HEADER.size:
        raise ValueError("truncated node id")
    (k,) = _ID_HEADER.unpack_from(data)
    if len(data) != _ID_HEADER.size + k * _ID_PAIR.size:
        raise ValueError("node id length does not match its dimension")
    pairs = [
        _ID_PAIR.unpack_from(data, _ID_HEADER.size + i * _ID_PAIR.size)
        for i in range(k)
    ]
    return HyperRect(pairs)


def format_node_id(rect: HyperRect) -> str:
    return f"d={len(rect)};" + ",".join(f"{iv.lo}-{iv.hi}" for iv in rect)


def parse_node_id(text: str) -> HyperRect:
    match = _TEXT_RE.match(text.strip())
    if not match:
        raise ValueError(f"malformed node id {text!r}")
    k = int(match.group(1))
    pairs = [tuple(int(v) for v in part.split("-")) for part in match.group(2).split(",")]
    if len(pairs) != k:
        raise ValueError(f"node id {text!r} declares d={k} but has {len(pairs)} intervals")
    return HyperRect(pairs)


# -- PolicySpace ---------------------------------------------------------------


def triangle_size(n: int) -> int:
    return n * (n + 1) // 2


def interval_index(lo, hi, n: int):
    """Rank of ``[lo, hi]`` among the intervals of ``[1, n]`` in lexicographic order.

    Works elementwise on numpy arrays.
    """
    # (lo-1)(lo-2) is always even and non-negative, so the shift is exact
    return (lo - 1) * n - (((lo - 1) * (lo - 2)) >> 1) + (hi - lo)


@dataclass(frozen=True)
class PolicySpace:
    """All hyperrectangles over ``extents[0] x ... x extents[k-1]`` points."""

    extents: tuple[int, ...]

    def __post_init__(self) -> None:
        ext = tuple(int(e) for e in self.extents)
        if not ext:
            raise InvalidSpaceError("dimension must be at least 1")
        if any(e < 1 for e in ext):
            raise InvalidSpaceError(f"extents must be positive, got {ext}")
        object.__setattr__(self, "extents", ext)

    @classmethod
    def cube(cls, n: int, k: int = 1) -> "PolicySpace":
        if k < 1:
            raise InvalidSpaceError("dimension must be at least 1")
        return cls((n,) * k)

    @property
    def k(self) -> int:
        return len(self.extents)

    @cached_property
    def _radix(self) -> tuple[int, ...]:
        return tuple(triangle_size(e) for e in self.extents)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for r in reversed(self._radix):
            out.append(acc)
            acc *= r
        return tuple(reversed(out))

    @property
    def size(self) -> int:
        total = 1
        for r in self._radix:
            total *= r
        return total

    @property
    def leaf_count(self) -> int:
        total = 1
        for e in self.extents:
            total *= e
        return total

    @cached_property
    def _interval_tables(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        tables = []
        for n in self.extents:
            lo, hi = np.triu_indices(n)
            tables.append(((lo + 1).astype(np.int64), (hi + 1).astype(np.int64)))
        return tuple(tables)

    def index(self, rect: HyperRect) -> int:
        if len(rect) != self.k:
            raise DimensionMismatchError(f"expected dimension {self.k}, got {len(rect)}")
        idx = 0
        for iv, n, stride in zip(rect, self.extents, self.strides):
            if iv.hi > n:
                raise ValueError(f"{rect!r} lies outside {self}")
            idx += interval_index(iv.lo, iv.hi, n) * stride
        return int(idx)

    def __contains__(self, rect: object) -> bool:
        return (
            isinstance(rect, HyperRect)
            and len(rect) == self.k
            and all(iv.hi <= n for iv, n in zip(rect, self.extents))
        )

    def rect(self, idx: int) -> HyperRect:
        if not 0 <= idx < self.size:
            raise IndexError(idx)
        pairs = []
        for (lo, hi), stride, radix in zip(self._interval_tables, self.strides, self._radix):
            j = (idx // stride) % radix
            pairs.append((int(lo[j]), int(hi[j])))
        return HyperRect(pairs)

    def indices(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`index` for ``(N, k)`` endpoint arrays."""
        lo = np.asarray(lo, dtype=np.int64).reshape(-1, self.k)
        hi = np.asarray(hi, dtype=np.int64).reshape(-1, self.k)
        idx = np.zeros(len(lo), dtype=np.int64)
        for d, (n, stride) in enumerate(zip(self.extents, self.strides)):
            idx += interval_index(lo[:, d], hi[:, d], n) * stride
        return idx

    def coords(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`indices`: ``(lo, hi)`` arrays of shape ``(N, k)``."""
        idx = np.asarray(idx, dtype=np.int64)
        lo = np.empty((len(idx), self.k), dtype=np.int64)
        hi = np.empty((len(idx), self.k), dtype=np.int64)
        for d, ((tlo, thi), stride, radix) in enumerate(
            zip(self._interval_tables, self.strides, self._radix)
        ):
            j = (idx // stride) % radix
            lo[:, d] = tlo[j]
            hi[:, d] = thi[j]
        return lo, hi

    def volumes(self, idx: np.ndarray) -> np.ndarray:
        lo, hi = self.coords(idx)
        return np.prod(hi - lo + 1, axis=1)

    def leaf_mask(self) -> np.ndarray:
        lo, hi = self.coords(np.arange(self.size))
        return np.all(lo == hi, axis=1)

    def leaf_indices(self) -> np.ndarray:
        return np.flatnonzero(self.leaf_mask())

    def __iter__(self) -> Iterator[HyperRect]:
        return iter(enumerate_nodes(self))

    def __str__(self) -> str:
        return "PolicySpace(" + "x".join(f"T_{e}" for e in self.extents) + ")"


def enumerate_nodes(space: PolicySpace) -> list[HyperRect]:
    """Every hyperrectangle of ``space`` once, in canonical NodeId order."""
    per_dim = [
        [(lo, hi) for lo in range(1, n + 1) for hi in range(lo, n + 1)]
        for n in space.extents
    ]
    return [HyperRect(combo) for combo in itertools.product(*per_dim)]
