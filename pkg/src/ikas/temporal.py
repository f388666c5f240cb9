"""Single-key edge sets for T_m (one temporal dimension).

Every builder works on *patterns*: the edges of a construction on a
segment of length ``L`` expressed in coordinates relative to the segment's
start. A recursive construction then becomes a handful of (pattern, offsets)
pairs, which keeps m=512 cheap.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import PolicySpace, interval_index
from .graph import DerivationGraph

Pattern = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


class InvalidScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class FactorSchedule:
    """Factors ``a_1 <= a_2 <= ... <= a_d`` (each at least 2) of ``m``."""

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(int(a) for a in self.factors))

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def product(self) -> int:
        return math.prod(self.factors)

    def validate(self, m: int) -> None:
        fs = self.factors
        if not fs:
            raise InvalidScheduleError("empty factor schedule")
        if any(a < 2 for a in fs):
            raise InvalidScheduleError(f"every factor must be at least 2: {fs}")
        if any(a > b for a, b in zip(fs, fs[1:])):
            raise InvalidScheduleError(f"factors must be non-decreasing: {fs}")
        if self.product != m:
            raise InvalidScheduleError(f"product of {fs} is {self.product}, not {m}")


# -- patterns -------------------------------------------------------------------


def _empty_pattern() -> Pattern:
    z = np.zeros(0, dtype=np.int64)
    return z, z, z, z


@lru_cache(maxsize=None)
def _one_hop_pattern(length: int) -> Pattern:
    if length < 2:
        return _empty_pattern()
    x, y = np.triu_indices(length, k=1)
    x, y = x + 1, y + 1
    size = y - x + 1
    plo, phi = np.repeat(x, size), np.repeat(y, size)
    # t runs over x..y inside each group
    offsets = np.arange(size.sum()) - np.repeat(np.cumsum(size) - size, size)
    t = plo + offsets
    return plo, phi, t, t


@lru_cache(maxsize=None)
def _straddle_pattern(length: int) -> Pattern:
    """Top-level binary-decomposition edges of a segment of ``length`` points."""
    left = length // 2
    if left < 1:
        return _empty_pattern()
    x, y = np.meshgrid(np.arange(1, left + 1), np.arange(left + 1, length + 1), indexing="ij")
    x, y = x.ravel(), y.ravel()
    plo = np.concatenate([x, x])
    phi = np.concatenate([y, y])
    clo = np.concatenate([x, np.full_like(y, left + 1)])
    chi = np.concatenate([np.full_like(x, left), y])
    return plo, phi, clo, chi


@lru_cache(maxsize=None)
def _diamond_to_leaf_blocks_pattern(a: int, b: int) -> Pattern:
    """Edges from every node straddling blocks of a T_a-of-supernodes split
    to its intersection with each block it touches."""
    x, y = np.meshgrid(np.arange(1, b + 1), np.arange(1, b + 1), indexing="ij")
    x, y = x.ravel(), y.ravel()
    parts: list[Pattern] = []
    for alpha in range(a):
        for beta in range(alpha + 1, a):
            plo, phi = x + alpha * b, y + beta * b
            for gamma in range(alpha, beta + 1):
                clo = plo if gamma == alpha else np.full_like(x, gamma * b + 1)
                chi = phi if gamma == beta else np.full_like(x, (gamma + 1) * b)
                parts.append((plo, phi, clo, chi))
    if not parts:
        return _empty_pattern()
    return tuple(np.concatenate(col) for col in zip(*parts))  # type: ignore[return-value]


def _tile(pattern: Pattern, starts: list[int]) -> Pattern:
    """Place ``pattern`` at every segment start (1-based)."""
    shift = np.asarray(starts, dtype=np.int64)[:, None] - 1
    return tuple((col[None, :] + shift).ravel() for col in pattern)  # type: ignore[return-value]


def _concat(parts: list[Pattern]) -> Pattern:
    parts = [p for p in parts if len(p[0])]
    if not parts:
        return _empty_pattern()
    return tuple(np.concatenate(col) for col in zip(*parts))  # type: ignore[return-value]


def graph_from_intervals(
    m: int, pattern: Pattern, construction: str, params: dict, **kwargs
) -> DerivationGraph:
    plo, phi, clo, chi = pattern
    space = PolicySpace((m,))
    return DerivationGraph(
        space,
        interval_index(plo, phi, m),
        interval_index(clo, chi, m),
        construction=construction,
        params=params,
        **kwargs,
    )


# -- builders ------------------------------------------------------------------


def one_hop_pattern(m: int) -> Pattern:
    return _one_hop_pattern(m)


def binary_decomposition_pattern(m: int, start: int = 1) -> Pattern:
    """Binary decomposition of the segment ``[start, start + m - 1]``."""
    parts = []
    level = {m: [start]}
    while level:
        nxt: dict[int, list[int]] = defaultdict(list)
        for length, starts in level.items():
            if length < 2:
                continue
            parts.append(_tile(_straddle_pattern(length), starts))
            left = length // 2
            nxt[left].extend(starts)
            nxt[length - left].extend(s + left for s in starts)
        level = nxt
    return _concat(parts)


def multiplicative_pattern(m: int, factors: tuple[int, ...]) -> Pattern:
    parts = []
    level = {(m, tuple(factors)): [1]}
    while level:
        nxt: dict[tuple[int, tuple[int, ...]], list[int]] = defaultdict(list)
        for (length, fs), starts in level.items():
            if len(fs) == 1:
                parts.append(_tile(_one_hop_pattern(length), starts))
                continue
            a, b = fs[0], length // fs[0]
            parts.append(_tile(_diamond_to_leaf_blocks_pattern(a, b), starts))
            for s in starts:
                nxt[(b, fs[1:])].extend(s + i * b for i in range(a))
        level = nxt
    return _concat(parts)


def one_hop(m: int) -> DerivationGraph:
    """Every non-leaf interval gets an edge to each point it contains."""
    if m < 1:
        raise ValueError("m must be positive")
    return graph_from_intervals(m, one_hop_pattern(m), "one-hop", {"m": m})


def binary_decomposition(m: int) -> DerivationGraph:
    if m < 1:
        raise ValueError("m must be positive")
    return graph_from_intervals(m, binary_decomposition_pattern(m), "bindec", {"m": m})


def multiplicative(
    m: int, schedule: FactorSchedule | tuple[int, ...], *, name: str = "mult"
) -> DerivationGraph:
    """d-hop scheme from a factorisation ``m = a_1 * ... * a_d``.

    T_m is viewed as a triangle T_{a_1} of supernodes: leaf supernodes are
    copies of T_{m/a_1} (handled recursively) and every node of a diamond
    supernode gets one edge per leaf supernode it overlaps.
    """
    if not isinstance(schedule, FactorSchedule):
        schedule = FactorSchedule(tuple(schedule))
    schedule.validate(m)
    return graph_from_intervals(
        m,
        multiplicative_pattern(m, schedule.factors),
        name,
        {"m": m, "factors": schedule.factors},
    )


def loglog_schedule(m: int) -> FactorSchedule:
    """``(4, 4, 16, 256, ...)`` for ``m = 2**(2**d)``."""
    d = _loglog_exponent(m)
    if d is None or d < 1:
        raise InvalidScheduleError(f"{m} is not of the form 2**(2**d) with d >= 1")
    factors = [4] + [2 ** (2 ** (i - 1)) for i in range(2, d + 1)]
    return FactorSchedule(tuple(factors))


def _loglog_exponent(m: int) -> int | None:
    if m < 2 or m & (m - 1):
        return None
    e = m.bit_length() - 1
    if e & (e - 1):
        return None
    return e.bit_length() - 1


def loglog(m: int) -> DerivationGraph:
    return multiplicative(m, loglog_schedule(m), name="loglog")
