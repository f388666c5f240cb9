"""Name -> builder lookup shared by the CLI and the key assignment layer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import formulas as F
from .core import HyperRect, PolicySpace
from .full import diamond_scheme, full_triangle_scheme
from .geo import E1, E2, geo_multikey, rect_grid, square_grid
from .graph import DerivationGraph
from .hyper import hypercube, hypercube_multikey
from .multikey import SpecialNodeScheme, four_key, three_key, two_key, two_key_one_hop
from .temporal import binary_decomposition, loglog, loglog_schedule, multiplicative, one_hop
from .verify import VerificationReport, check_desk_scale, check_enforcing, check_multikey


class UnknownConstructionError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0])


@dataclass
class Built:
    """A constructed scheme, single-key or multi-key, with a uniform face."""

    graph: DerivationGraph
    scheme: SpecialNodeScheme | None = None

    @property
    def space(self) -> PolicySpace:
        return self.graph.space

    @property
    def max_keys(self) -> int:
        return self.scheme.max_keys if self.scheme else 1

    def cover(self, label: HyperRect) -> list[HyperRect]:
        if self.scheme is not None:
            return self.scheme.cover(label)
        if label not in self.space:
            raise ValueError(f"{label!r} lies outside {self.space}")
        return [label]


@dataclass(frozen=True)
class Construction:
    name: str
    needs: tuple[str, ...]
    build_fn: Callable[..., DerivationGraph | SpecialNodeScheme] = field(repr=False)
    # closed-form expectations checked by ``verify``; each takes the params dict
    edges: Callable[[dict], int] | None = field(default=None, repr=False)
    depth: Callable[[dict], int] | None = field(default=None, repr=False)
    bounds: dict[str, Callable[[dict, int], bool]] = field(default_factory=dict, repr=False)
    components: Callable[[dict], int] | None = field(default=None, repr=False)

    @property
    def multikey(self) -> bool:
        return self.name in _MULTIKEY

    def build(self, params: dict) -> Built:
        missing = [p for p in self.needs if params.get(p) is None]
        if missing:
            raise ValueError(f"{self.name} needs --{' --'.join(missing)}")
        out = self.build_fn(**{p: params[p] for p in self.needs})
        if isinstance(out, SpecialNodeScheme):
            return Built(out.graph, out)
        return Built(out)


_MULTIKEY = {"2key", "2key-1hop", "3key", "4key", "geo-4key", "hyper-multikey"}


def _m(p):
    return p["m"]


def _mult_factors(p) -> tuple[int, ...]:
    return tuple(p["factors"])


CONSTRUCTIONS: dict[str, Construction] = {
    c.name: c
    for c in [
        Construction(
            "one-hop", ("m",), one_hop, edges=lambda p: F.one_hop_edges(_m(p)), depth=lambda p: 1
        ),
        Construction(
            "bindec",
            ("m",),
            binary_decomposition,
            edges=lambda p: F.bindec_edges(_m(p)),
            depth=lambda p: F.bindec_depth(_m(p)),
            bounds={"edges >= m(m-1)": lambda p, e: e >= F.lower_bound_edges(_m(p))},
        ),
        Construction(
            "mult",
            ("m", "factors"),
            lambda m, factors: multiplicative(m, tuple(factors)),
            edges=lambda p: F.multiplicative_edges(_m(p), _mult_factors(p)),
            depth=lambda p: len(_mult_factors(p)),
            bounds={"edges >= m(m-1)": lambda p, e: e >= F.lower_bound_edges(_m(p))},
        ),
        Construction(
            "loglog",
            ("m",),
            loglog,
            edges=lambda p: F.multiplicative_edges(_m(p), loglog_schedule(_m(p)).factors),
            depth=lambda p: F.ceil_log2(F.ceil_log2(_m(p))),
            bounds={"edges < m^2(1 + loglog m / 6)": lambda p, e: e < F.loglog_bound(_m(p))},
        ),
        Construction(
            "2key",
            ("m",),
            two_key,
            depth=lambda p: F.log2_exact(_m(p)) - 1,
            bounds={"edges < 2m log m": lambda p, e: e < F.two_key_bound(_m(p))},
            components=lambda p: 2,
        ),
        Construction(
            "2key-1hop",
            ("m",),
            two_key_one_hop,
            depth=lambda p: 1,
            bounds={"edges <= m(m - 1 + log m)/2": lambda p, e: e <= F.two_key_one_hop_bound(_m(p))},
        ),
        Construction(
            "3key",
            ("m",),
            three_key,
            bounds={"edges <= 5m loglog m": lambda p, e: e <= F.three_key_bound(_m(p))},
        ),
        Construction(
            "4key",
            ("m",),
            four_key,
            bounds={"edges <= 6m log* m": lambda p, e: e <= F.four_key_bound(_m(p))},
        ),
        Construction(
            "square",
            ("n",),
            square_grid,
            edges=lambda p: F.square_edges(p["n"]),
            bounds={"edges < 8/3 |T_nn|": lambda p, e: e < F.square_bound(p["n"])},
        ),
        Construction(
            "rect-e1",
            ("m", "k"),
            lambda m, k: rect_grid(m, k, E1),
            edges=lambda p: F.rect_e1_edges(p["m"], p["k"]),
        ),
        Construction(
            "rect-e2",
            ("m", "k"),
            lambda m, k: rect_grid(m, k, E2),
            edges=lambda p: F.rect_e2_edges(p["m"], p["k"]),
            bounds={
                "edges < 2|T_m,km|(1 + 1/3k)": lambda p, e: e < F.rect_e2_bound(p["m"], p["k"])
            },
        ),
        Construction(
            "geo-4key",
            ("n",),
            geo_multikey,
            bounds={"edges <= 4n^2(n-1)": lambda p, e: e <= F.geo_multikey_bound(p["n"])},
            components=lambda p: 4,
        ),
        Construction(
            "hyper",
            ("n", "k"),
            hypercube,
            edges=lambda p: F.hypercube_edges(p["n"], p["k"]),
            bounds={
                "edges > lower bound": lambda p, e: e > F.hypercube_lower(p["n"], p["k"]),
                "edges <= binomial upper bound": lambda p, e: e
                <= F.hypercube_upper_binomial(p["n"], p["k"]),
            },
        ),
        Construction(
            "hyper-multikey",
            ("n", "k"),
            hypercube_multikey,
            bounds={
                "edges <= 2kn^k(n^(k-1) + log n - 1)": lambda p, e: e
                <= F.hypercube_multikey_bound(p["n"], p["k"])
            },
            components=lambda p: 2 ** p["k"],
        ),
        Construction(
            "diamond",
            ("m",),
            diamond_scheme,
            edges=lambda p: F.diamond_edges(_m(p)),
            depth=lambda p: 2 * F.log2_exact(_m(p)),
        ),
        Construction(
            "full-triangle",
            ("m",),
            full_triangle_scheme,
            edges=lambda p: F.full_triangle_edges(_m(p)),
        ),
    ]
}


def names() -> list[str]:
    return list(CONSTRUCTIONS)


def lookup(name: str) -> Construction:
    try:
        return CONSTRUCTIONS[name]
    except KeyError:
        raise UnknownConstructionError(
            f"unknown construction {name!r}; choose from {', '.join(CONSTRUCTIONS)}"
        ) from None


def build(name: str, **params) -> Built:
    return lookup(name).build(params)


def verify(name: str, *, force: bool = False, **params) -> VerificationReport:
    """Enforcement plus every closed form and bound registered for ``name``."""
    con = lookup(name)
    built = con.build(params)
    if not force:
        check_desk_scale(built.space)
    p = {k: params[k] for k in con.needs}
    expected_edges = con.edges(p) if con.edges else None
    expected_depth = con.depth(p) if con.depth else None
    if built.scheme is not None:
        report = check_multikey(
            built.scheme, expected_components=con.components(p) if con.components else None
        )
        report.expected_edge_count = expected_edges
        report.expected_depth = expected_depth
    else:
        report = check_enforcing(
            built.graph, expected_edge_count=expected_edges, expected_depth=expected_depth
        )
    for label, check in con.bounds.items():
        report.bound_checks[label] = bool(check(p, report.edge_count))
    return report
