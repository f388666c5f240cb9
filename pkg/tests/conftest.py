from __future__ import annotations

import itertools

import pytest

from ikas.core import HyperRect

# acceptance results collected by test_acceptance.py, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def rects(extents):
    """Every hyperrectangle of a space, straight from the definition."""
    per_dim = [[(lo, hi) for lo in range(1, n + 1) for hi in range(lo, n + 1)] for n in extents]
    return [HyperRect(p) for p in itertools.product(*per_dim)]


def naive_violations(g) -> list:
    """Enforcement checked with plain dict adjacency and DFS, no numpy."""
    adj: dict = {}
    for p, c in g.edges():
        adj.setdefault(p, []).append(c)
    universe = [g.space.rect(int(i)) for i in g.nodes]
    targets = set(g.space.rect(int(i)) for i in g.target_indices())
    bad = []
    for u in universe:
        seen = {u}
        stack = [u]
        while stack:
            for v in adj.get(stack.pop(), ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        for t in targets:
            inside = all(a.lo <= b.lo and b.hi <= a.hi for a, b in zip(u, t))
            if inside != (t in seen):
                bad.append((u, t))
    return bad


@pytest.fixture
def oracle():
    return naive_violations


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
