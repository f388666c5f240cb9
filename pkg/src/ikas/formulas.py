"""Closed-form edge counts and bounds, kept apart from the constructions so
that tests can compare the two.

Everything is exact: counts come back as ``int`` and bounds as
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def log_star(n: float) -> int:
    """Iterations of log2 needed to bring ``n`` down to at most 1."""
    count = 0
    while n > 1:
        n = math.log2(n)
        count += 1
    return count


def triangle_nodes(m: int) -> int:
    return m * (m + 1) // 2


def grid_nodes(m: int, n: int) -> int:
    return triangle_nodes(m) * triangle_nodes(n)


def _int(value: Fraction) -> int:
    if value.denominator != 1:
        raise ArithmeticError(f"{value} is not an integer")
    return int(value)


# -- single key, one dimension --------------------------------------------------


def one_hop_edges(m: int) -> int:
    return _int(Fraction(m * (m - 1) * (m + 4), 6))


def bindec_edges(m: int) -> int:
    return m * (m - 1)


def bindec_depth(m: int) -> int:
    return ceil_log2(m)


def multiplicative_edges(m: int, factors: Sequence[int]) -> int:
    total = Fraction(0)
    prefix = 1
    for a in factors:
        prefix *= a
        total += Fraction((a - 1) * (a + 4), prefix)
    return _int(total * m * m / 6)


def power_edges(m: int, a: int) -> int:
    """Count for ``m = a^d`` with every factor equal to ``a``."""
    return _int(Fraction(m * (m - 1) * (a + 4), 6))


def loglog_bound(m: int) -> Fraction:
    return m * m * (1 + Fraction(ceil_log2(ceil_log2(m)), 6))


def lower_bound_edges(m: int) -> int:
    """No enforcing single-key graph on ``T_m`` has fewer edges."""
    return m * (m - 1)


# -- multiple keys, one dimension --------------------------------------------------


def two_key_bound(m: int) -> int:
    return 2 * m * log2_exact(m)


def two_key_one_hop_bound(m: int) -> Fraction:
    return Fraction(m * (m - 1 + log2_exact(m)), 2)


def three_key_bound(m: int) -> int:
    return 5 * m * ceil_log2(ceil_log2(m))


def four_key_bound(m: int) -> int:
    return 6 * m * log_star(m)


# -- two dimensions ---------------------------------------------------------------


def square_edges(n: int) -> int:
    return _int(Fraction(n * n * (n - 1) * (2 * n + 5), 3))


def square_bound(n: int) -> Fraction:
    return Fraction(8, 3) * grid_nodes(n, n)


def rect_e1_edges(m: int, k: int) -> int:
    return _int(Fraction(k * m * m * ((k - 1) * (k + 4) * m * (m + 1) + 4 * (m - 1) * (2 * m + 5)), 12))


def rect_e2_edges(m: int, k: int) -> int:
    return _int(Fraction(k * m * m * (3 * (k - 1) * m * (m + 1) + 2 * (m - 1) * (2 * m + 5)), 6))


def rect_e2_bound(m: int, k: int) -> Fraction:
    return 2 * grid_nodes(m, k * m) * (1 + Fraction(1, 3 * k))


def geo_multikey_bound(n: int) -> int:
    return 4 * n * n * (n - 1)


def geo_special_bound(n: int) -> int:
    return n * n * (n - 1)


# -- k dimensions ------------------------------------------------------------------


def hypercube_edges(n: int, k: int) -> int:
    total = Fraction(0)
    for i in range(1, k + 1):
        total += Fraction(math.comb(k, i) * (3**i - 1) * (n**i - 1), 2**i - 1)
    return _int(total * Fraction(n**k, 2**k))


def hypercube_lower(n: int, k: int) -> Fraction:
    return Fraction((3**k - 1) * n**k * (n**k - 1), 2**k * (2**k - 1))


def hypercube_upper(n: int, k: int) -> Fraction:
    """Upper end of the sandwich with ``n^k + 1`` as the last factor."""
    return Fraction((3**k - 1) * n**k * (n**k + 1), 2**k * (2**k - 1))


def hypercube_upper_binomial(n: int, k: int) -> Fraction:
    """Upper end with ``(n + 1)^k``, which is what summing the binomial series gives."""
    return Fraction((3**k - 1) * n**k * (n + 1) ** k, 2**k * (2**k - 1))


def hypercube_multikey_bound(n: int, k: int) -> int:
    return 2 * k * n**k * (n ** (k - 1) + log2_exact(n) - 1)


# -- all-node targets ----------------------------------------------------------------


def diamond_edges(m: int) -> int:
    return m * m * log2_exact(m)


def full_triangle_edges(m: int) -> int:
    return _int(Fraction(m * m * log2_exact(m), 2))
