"""Brute-force checks that know nothing about how a graph was built.

Enforcement is decided from reachability (computed over the edge arrays)
and containment (computed from node coordinates) alone.
"""

from __future__ import annotations

import csv
import graphlib
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import formulas as F
from .core import HyperRect, PolicySpace
from .graph import DerivationGraph, bfs_distances, component_count, derivation_depth
from .multikey import SpecialNodeScheme

MAX_REPORTED_VIOLATIONS = 1000

# largest parameter each dimension is checked at without --force
DESK_CAPS = {1: 512, 2: 16, 3: 4}


class TooLargeError(ValueError):
    pass


def check_desk_scale(space: PolicySpace) -> None:
    cap = DESK_CAPS.get(space.k)
    if cap is None or max(space.extents) > cap:
        raise TooLargeError(f"{space} is beyond desk scale (limit {cap} per side); force it to run anyway")


@dataclass
class VerificationReport:
    construction: str
    params: dict
    enforcing: bool
    edge_count: int
    depth: int | None = None
    expected_edge_count: int | None = None
    expected_depth: int | None = None
    violated_pairs: list[tuple[HyperRect, HyperRect]] = field(default_factory=list)
    violation_count: int = 0
    bound_checks: dict[str, bool] = field(default_factory=dict)
    max_cover_size: int | None = None
    component_count: int | None = None

    @property
    def passed(self) -> bool:
        return (
            self.enforcing
            and (self.expected_edge_count is None or self.edge_count == self.expected_edge_count)
            and (self.expected_depth is None or self.depth == self.expected_depth)
            and all(self.bound_checks.values())
        )

    def summary(self) -> str:
        lines = [
            f"construction: {self.construction} {_fmt_params(self.params)}",
            f"enforcing: {str(self.enforcing).lower()} ({self.violation_count} violations)",
            f"edges: {self.edge_count}"
            + (f" (expected {self.expected_edge_count})" if self.expected_edge_count is not None else ""),
        ]
        if self.depth is not None:
            lines.append(
                f"depth: {self.depth}"
                + (f" (expected {self.expected_depth})" if self.expected_depth is not None else "")
            )
        if self.max_cover_size is not None:
            lines.append(f"largest cover: {self.max_cover_size}")
        if self.component_count is not None:
            lines.append(f"components: {self.component_count}")
        for name, ok in self.bound_checks.items():
            lines.append(f"check {name}: {'ok' if ok else 'FAILED'}")
        for u, t in self.violated_pairs[:10]:
            lines.append(f"violation: {u} vs {t}")
        lines.append("result: " + ("pass" if self.passed else "FAIL"))
        return "\n".join(lines)


def _fmt_params(params: dict) -> str:
    return ",".join(f"{k}={'x'.join(map(str, v)) if isinstance(v, tuple) else v}" for k, v in params.items())


def _bits(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def reachable_targets(g: DerivationGraph) -> tuple[np.ndarray, dict[int, int]]:
    """Targets (as an index array) and, per node of the universe, a bitset
    of the targets reachable from it (bit ``i`` is ``targets[i]``)."""
    targets = g.target_indices()
    position = {int(t): i for i, t in enumerate(targets.tolist())}
    parents, children = g.parents.tolist(), g.children.tolist()
    succ: dict[int, list[int]] = {}
    for p, c in zip(parents, children):
        succ.setdefault(p, []).append(c)
    universe = set(g.nodes.tolist()) | set(parents) | set(children)

    reach: dict[int, int] = {}
    try:
        order = list(graphlib.TopologicalSorter({u: succ.get(u, ()) for u in universe}).static_order())
    except graphlib.CycleError:
        order = None
    if order is not None:
        # static_order yields successors before the nodes pointing at them
        for u in order:
            r = 1 << position[u] if u in position else 0
            for c in succ.get(u, ()):
                r |= reach[c]
            reach[u] = r
    else:
        for u in universe:
            r = 0
            for v in bfs_distances(g, u):
                if v in position:
                    r |= 1 << position[v]
            reach[u] = r
    return targets, reach


def check_enforcing(
    g: DerivationGraph,
    *,
    expected_edge_count: int | None = None,
    expected_depth: int | None = None,
    with_depth: bool = True,
) -> VerificationReport:
    """For every node ``u`` and target ``t``: ``t`` reachable from ``u`` iff ``t`` inside ``u``."""
    space = g.space
    targets, reach = reachable_targets(g)
    tlo, thi = space.coords(targets)
    nodes = g.nodes
    nlo, nhi = space.coords(nodes)

    violations: list[tuple[HyperRect, HyperRect]] = []
    count = 0
    for i, u in enumerate(nodes.tolist()):
        inside = np.all((nlo[i] <= tlo) & (thi <= nhi[i]), axis=1)
        diff = reach[u] ^ _bits(inside)
        if not diff:
            continue
        count += bin(diff).count("1")
        if len(violations) < MAX_REPORTED_VIOLATIONS:
            j = 0
            while diff and len(violations) < MAX_REPORTED_VIOLATIONS:
                if diff & 1:
                    violations.append((space.rect(u), space.rect(int(targets[j]))))
                diff >>= 1
                j += 1

    depth = derivation_depth(g) if with_depth else None
    return VerificationReport(
        construction=g.construction,
        params=dict(g.params),
        enforcing=count == 0,
        edge_count=g.edge_count,
        depth=depth,
        expected_edge_count=expected_edge_count,
        expected_depth=expected_depth,
        violated_pairs=violations,
        violation_count=count,
    )


def cover_problems(scheme: SpecialNodeScheme, label: HyperRect) -> list[str]:
    """Reasons the cover of ``label`` is wrong (empty when it is fine)."""
    parts = scheme.cover(label)
    problems = []
    if len(parts) > scheme.max_keys:
        problems.append(f"{len(parts)} parts exceed {scheme.max_keys} keys")
    for part in parts:
        if not label.covers(part):
            problems.append(f"{part} sticks out of {label}")
        if not (part.is_leaf or scheme.is_special(part)):
            problems.append(f"{part} is not special")
    for a, b in itertools.combinations(parts, 2):
        if not a.disjoint(b):
            problems.append(f"{a} overlaps {b}")
    if sum(p.volume for p in parts) != label.volume:
        problems.append("parts do not add up to the label")
    return problems


def check_multikey(
    scheme: SpecialNodeScheme,
    *,
    expected_components: int | None = None,
    max_components: int | None = None,
    labels: Iterable[HyperRect] | None = None,
) -> VerificationReport:
    """Exhaustive cover checks plus enforcement on the induced graph."""
    report = check_enforcing(scheme.graph)
    largest = 0
    bad = []
    for label in labels if labels is not None else scheme.space:
        problems = cover_problems(scheme, label)
        largest = max(largest, len(scheme.cover(label)))
        if problems:
            bad.append((label, problems))
    report.max_cover_size = largest
    report.component_count = component_count(scheme.graph)
    report.bound_checks["covers"] = not bad
    report.bound_checks[f"cover size <= {scheme.max_keys}"] = largest <= scheme.max_keys
    if expected_components is not None:
        report.bound_checks[f"components == {expected_components}"] = (
            report.component_count == expected_components
        )
    if max_components is not None:
        report.bound_checks[f"components <= {max_components}"] = report.component_count <= max_components
    return report


# -- formula table ---------------------------------------------------------------


@dataclass(frozen=True)
class FormulaRow:
    family: str
    params: dict
    edges: int
    depth: int
    formula: Fraction | int
    relation: str  # how edges compare with formula: "=", "<", "<=" or ">"
    expected_depth: int | None = None

    @property
    def match(self) -> bool:
        ok = {
            "=": self.edges == self.formula,
            "<": self.edges < self.formula,
            "<=": self.edges <= self.formula,
            ">": self.edges > self.formula,
        }[self.relation]
        return ok and (self.expected_depth is None or self.depth == self.expected_depth)

    @property
    def param_text(self) -> str:
        return _fmt_params(self.params)

    @property
    def formula_text(self) -> str:
        f = self.formula
        if isinstance(f, Fraction) and f.denominator != 1:
            return f"{float(f):.2f}"
        return str(int(f))


# factorisations checked against the multiplicative closed form
MULT_CASES = [(12, (3, 4)), (16, (4, 4)), (16, (2, 2, 2, 2)), (36, (6, 6)), (64, (4, 4, 4))]


def _exact_log(m: int, a: int) -> int:
    d, rest = 0, m
    while rest > 1:
        rest, r = divmod(rest, a)
        if r:
            raise ValueError(f"{m} is not a power of {a}")
        d += 1
    return d


def _powers_of_two(lo: int, hi: int) -> list[int]:
    return [1 << e for e in range(0, 64) if lo <= 1 << e <= hi]


@dataclass(frozen=True)
class Family:
    name: str
    values: Callable[[int, int], list[int]]
    build: Callable[[int], DerivationGraph]
    formula: Callable[[int], Fraction | int]
    relation: str = "="
    depth: Callable[[int], int] | None = None
    params: Callable[[int], dict] = lambda v: {"m": v}


def _families() -> dict[str, Family]:
    from .full import diamond_scheme, full_triangle_scheme
    from .geo import rect_grid, square_grid
    from .hyper import hypercube
    from .temporal import binary_decomposition, loglog, multiplicative, one_hop

    def every(lo, hi):
        return list(range(max(lo, 2), hi + 1))

    def loglog_values(lo, hi):
        return [m for m in (4, 16, 256, 65536) if lo <= m <= hi]

    fams = [
        Family("bindec", every, binary_decomposition, F.bindec_edges, depth=F.bindec_depth),
        Family("one-hop", every, one_hop, F.one_hop_edges, depth=lambda m: 1),
        Family(
            "mult",
            lambda lo, hi: [mf for mf in MULT_CASES if lo <= mf[0] <= hi],
            lambda mf: multiplicative(*mf),
            lambda mf: F.multiplicative_edges(*mf),
            depth=lambda mf: len(mf[1]),
            params=lambda mf: {"m": mf[0], "factors": mf[1]},
        ),
        Family("loglog", loglog_values, loglog, F.loglog_bound, "<", depth=lambda m: F.ceil_log2(F.ceil_log2(m))),
        Family(
            "square", _powers_of_two, square_grid, F.square_edges, depth=F.log2_exact, params=lambda n: {"n": n}
        ),
        Family(
            "square-bound",
            _powers_of_two,
            square_grid,
            F.square_bound,
            "<",
            params=lambda n: {"n": n},
        ),
        Family("diamond", _powers_of_two, diamond_scheme, F.diamond_edges),
        Family(
            "full-triangle",
            lambda lo, hi: [m for m in _powers_of_two(lo, hi) if m >= 2],
            full_triangle_scheme,
            F.full_triangle_edges,
        ),
    ]
    for a in (2, 3, 4):
        fams.append(
            Family(
                f"power{a}",
                lambda lo, hi, a=a: [a**d for d in range(1, 12) if lo <= a**d <= hi],
                lambda m, a=a: multiplicative(m, (a,) * _exact_log(m, a)),
                lambda m, a=a: F.power_edges(m, a),
                depth=lambda m, a=a: _exact_log(m, a),
            )
        )
    for k in (1, 2, 3):
        fams.append(
            Family(
                f"hyper-k{k}",
                _powers_of_two,
                lambda n, k=k: hypercube(n, k),
                lambda n, k=k: F.hypercube_edges(n, k),
                depth=F.log2_exact,
                params=lambda n, k=k: {"n": n, "k": k},
            )
        )
    for k in (2, 3):
        fams.append(
            Family(
                f"hyper-k{k}-lower",
                _powers_of_two,
                lambda n, k=k: hypercube(n, k),
                lambda n, k=k: F.hypercube_lower(n, k),
                ">",
                params=lambda n, k=k: {"n": n, "k": k},
            )
        )
        fams.append(
            Family(
                f"hyper-k{k}-upper",
                _powers_of_two,
                lambda n, k=k: hypercube(n, k),
                lambda n, k=k: F.hypercube_upper(n, k),
                "<",
                params=lambda n, k=k: {"n": n, "k": k},
            )
        )
        fams.append(
            Family(
                f"hyper-k{k}-upper-binomial",
                _powers_of_two,
                lambda n, k=k: hypercube(n, k),
                lambda n, k=k: F.hypercube_upper_binomial(n, k),
                "<",
                params=lambda n, k=k: {"n": n, "k": k},
            )
        )
    for k in (1, 2, 3, 4):
        fams.append(
            Family(
                f"rect-e1-k{k}",
                _powers_of_two,
                lambda m, k=k: rect_grid(m, k, "E1"),
                lambda m, k=k: F.rect_e1_edges(m, k),
                params=lambda m, k=k: {"m": m, "k": k},
            )
        )
        fams.append(
            Family(
                f"rect-e2-k{k}",
                _powers_of_two,
                lambda m, k=k: rect_grid(m, k, "E2"),
                lambda m, k=k: F.rect_e2_edges(m, k),
                params=lambda m, k=k: {"m": m, "k": k},
            )
        )
        fams.append(
            Family(
                f"rect-e2-k{k}-bound",
                _powers_of_two,
                lambda m, k=k: rect_grid(m, k, "E2"),
                lambda m, k=k: F.rect_e2_bound(m, k),
                "<",
                params=lambda m, k=k: {"m": m, "k": k},
            )
        )
    return {f.name: f for f in fams}


def family_names() -> list[str]:
    return list(_families())


def formula_table(family: str, lo: int, hi: int) -> list[FormulaRow]:
    fams = _families()
    if family not in fams:
        raise KeyError(f"unknown family {family!r}; choose from {', '.join(fams)}")
    fam = fams[family]
    rows = []
    for v in fam.values(lo, hi):
        g = fam.build(v)
        rows.append(
            FormulaRow(
                family,
                fam.params(v),
                g.edge_count,
                derivation_depth(g),
                fam.formula(v),
                fam.relation,
                fam.depth(v) if fam.depth else None,
            )
        )
    return rows


def default_report() -> list[FormulaRow]:
    """Every closed form and bound the artifact checks, at desk scale."""
    plan = [
        ("bindec", 2, 64),
        ("one-hop", 2, 32),
        ("mult", 2, 64),
        ("power2", 2, 64),
        ("power3", 2, 81),
        ("power4", 2, 64),
        ("loglog", 16, 256),
        ("square", 2, 16),
        ("square-bound", 2, 16),
        ("diamond", 2, 16),
        ("full-triangle", 2, 16),
        ("hyper-k1", 2, 16),
        ("hyper-k2", 2, 16),
        ("hyper-k3", 2, 8),
        ("hyper-k2-lower", 2, 16),
        ("hyper-k3-lower", 2, 8),
        ("hyper-k2-upper", 2, 16),
        ("hyper-k3-upper", 2, 8),
        ("hyper-k2-upper-binomial", 2, 16),
        ("hyper-k3-upper-binomial", 2, 8),
    ]
    for k in (1, 2, 3, 4):
        plan += [(f"rect-e1-k{k}", 2, 8), (f"rect-e2-k{k}", 2, 8), (f"rect-e2-k{k}-bound", 2, 8)]
    rows = []
    for name, lo, hi in plan:
        rows.extend(formula_table(name, lo, hi))
    return rows


def format_table(rows: list[FormulaRow], fmt: str = "text") -> str:
    header = ["family", "params", "edges", "depth", "relation", "formula", "match"]
    body = [
        [
            r.family,
            r.param_text,
            str(r.edges),
            str(r.depth),
            r.relation,
            r.formula_text,
            "yes" if r.match else "NO",
        ]
        for r in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [header, *body]]
    return "\n".join(lines) + "\n"
