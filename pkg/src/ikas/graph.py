"""Immutable derivation graphs over a :class:`~ikas.core.PolicySpace`.

Edges are held as two parallel ``int64`` arrays of node indices, sorted by
``(parent, child)``. Graphs with millions of edges are routine (the
three-dimensional constructions at n=16), so nothing here materialises
per-edge Python objects unless asked to.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import HyperRect, PolicySpace, format_node_id, parse_node_id

LEAVES = "leaves-only"
ALL_NODES = "all-nodes"


class UnknownNodeError(KeyError):
    pass


class GraphInvariantError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeStats:
    node_count: int
    edge_count: int
    derivation_depth: int
    max_out_degree: int
    component_count: int


class DerivationGraph:
    """A DAG whose nodes are hyperrectangles and whose edges point from a node
    to a node it strictly contains.

    ``nodes`` restricts the node universe (special nodes of a multi-key scheme,
    the cells of a diamond); ``None`` means every node of ``space``.
    """

    def __init__(
        self,
        space: PolicySpace,
        parents: np.ndarray,
        children: np.ndarray,
        *,
        construction: str,
        params: Mapping[str, object] | None = None,
        target_set: str = LEAVES,
        nodes: np.ndarray | None = None,
    ) -> None:
        if target_set not in (LEAVES, ALL_NODES):
            raise ValueError(f"unknown target set {target_set!r}")
        parents = np.asarray(parents, dtype=np.int64).ravel()
        children = np.asarray(children, dtype=np.int64).ravel()
        if parents.shape != children.shape:
            raise ValueError("parent and child arrays differ in length")
        size = space.size
        if len(parents) and (
            min(parents.min(), children.min()) < 0 or max(parents.max(), children.max()) >= size
        ):
            raise UnknownNodeError("edge endpoint outside the policy space")
        order = np.argsort(parents * size + children, kind="stable")
        parents, children = parents[order], children[order]
        if len(parents) > 1:
            dup = (parents[1:] == parents[:-1]) & (children[1:] == children[:-1])
            if dup.any():
                i = int(np.flatnonzero(dup)[0])
                raise GraphInvariantError(
                    f"duplicate edge {space.rect(int(parents[i]))} -> {space.rect(int(children[i]))}"
                )
        parents.setflags(write=False)
        children.setflags(write=False)
        self.space = space
        self.parents = parents
        self.children = children
        self.construction = construction
        self.params = dict(params or {})
        self.target_set = target_set
        if nodes is not None:
            nodes = np.unique(np.asarray(nodes, dtype=np.int64))
            nodes.setflags(write=False)
        self._nodes = nodes

    # -- basic accessors ---------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.parents)

    @property
    def nodes(self) -> np.ndarray:
        if self._nodes is None:
            return np.arange(self.space.size, dtype=np.int64)
        return self._nodes

    @property
    def node_count(self) -> int:
        return self.space.size if self._nodes is None else len(self._nodes)

    @cached_property
    def indptr(self) -> np.ndarray:
        return np.searchsorted(self.parents, np.arange(self.space.size + 1, dtype=np.int64))

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def index_of(self, node) -> int:
        if isinstance(node, (int, np.integer)):
            idx = int(node)
            if not 0 <= idx < self.space.size:
                raise UnknownNodeError(node)
            return idx
        try:
            return self.space.index(node)
        except ValueError as exc:
            raise UnknownNodeError(node) from exc

    def child_indices(self, node) -> np.ndarray:
        u = self.index_of(node)
        return self.children[self.indptr[u] : self.indptr[u + 1]]

    def children_of(self, node) -> list[HyperRect]:
        return [self.space.rect(int(c)) for c in self.child_indices(node)]

    def edges(self) -> Iterator[tuple[HyperRect, HyperRect]]:
        rect = self.space.rect
        for p, c in zip(self.parents.tolist(), self.children.tolist()):
            yield rect(p), rect(c)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.parents.tolist(), self.children.tolist()))

    def target_indices(self) -> np.ndarray:
        if self.target_set == ALL_NODES:
            return self.nodes
        leaves = self.space.leaf_indices()
        if self._nodes is None:
            return leaves
        return np.intersect1d(leaves, self._nodes)

    def with_edges(
        self,
        add: Sequence[tuple[HyperRect, HyperRect]] = (),
        remove: Sequence[tuple[HyperRect, HyperRect]] = (),
    ) -> "DerivationGraph":
        """A copy with edges added and/or removed (for mutation testing)."""
        size = self.space.size
        keys = self.parents * size + self.children
        if remove:
            drop = np.array([self.index_of(p) * size + self.index_of(c) for p, c in remove])
            missing = np.setdiff1d(drop, keys)
            if len(missing):
                raise UnknownNodeError("cannot remove an edge that is not present")
            keys = keys[~np.isin(keys, drop)]
        if add:
            extra = np.array([self.index_of(p) * size + self.index_of(c) for p, c in add])
            keys = np.concatenate([keys, extra])
        return DerivationGraph(
            self.space,
            keys // size,
            keys % size,
            construction=self.construction,
            params=self.params,
            target_set=self.target_set,
            nodes=self._nodes,
        )

    def check_containment(self) -> list[tuple[HyperRect, HyperRect]]:
        """Edges whose child is not a strict subset of the parent."""
        if not self.edge_count:
            return []
        plo, phi = self.space.coords(self.parents)
        clo, chi = self.space.coords(self.children)
        ok = np.all((plo <= clo) & (chi <= phi), axis=1) & (self.parents != self.children)
        bad = np.flatnonzero(~ok)
        return [
            (self.space.rect(int(self.parents[i])), self.space.rect(int(self.children[i])))
            for i in bad
        ]

    # -- serialisation -----------------------------------------------------

    def header(self) -> str:
        params = ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params.items())
        extents = ",".join(str(e) for e in self.space.extents)
        return (
            f"# construction={self.construction} params={params} "
            f"k={self.space.k} extents={extents} target={self.target_set}"
        )

    def export_lines(self) -> Iterator[str]:
        yield self.header()
        for p, c in self.edges():
            yield f"{format_node_id(p)} -> {format_node_id(c)}"

    def export_text(self) -> str:
        return "\n".join(self.export_lines()) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DerivationGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing header line")
        fields = dict(
            tok.split("=", 1) for tok in lines[0].lstrip("#").split() if "=" in tok
        )
        extents = tuple(int(e) for e in fields["extents"].split(","))
        space = PolicySpace(extents)
        params: dict[str, object] = {}
        if fields.get("params"):
            for item in fields["params"].split(","):
                key, _, value = item.partition("=")
                params[key] = _parse_param(value)
        parents, children = [], []
        for line in lines[1:]:
            left, sep, right = line.partition("->")
            if not sep:
                raise ValueError(f"malformed edge line {line!r}")
            parents.append(space.index(parse_node_id(left)))
            children.append(space.index(parse_node_id(right)))
        return cls(
            space,
            np.array(parents, dtype=np.int64),
            np.array(children, dtype=np.int64),
            construction=fields.get("construction", "imported"),
            params=params,
            target_set=fields.get("target", LEAVES),
        )

    def __repr__(self) -> str:
        return (
            f"DerivationGraph({self.construction}, {self.space}, "
            f"edges={self.edge_count}, target={self.target_set})"
        )


def _fmt_param(value: object) -> str:
    if isinstance(value, (tuple, list)):
        return "x".join(str(v) for v in value)
    return str(value)


def _parse_param(text: str) -> object:
    if "x" in text:
        return tuple(int(v) for v in text.split("x"))
    try:
        return int(text)
    except ValueError:
        return text


# -- queries -------------------------------------------------------------------


def shortest_hops(g: DerivationGraph, source, target) -> int | None:
    """Fewest edges on a directed path from ``source`` to ``target``; ``None``
    if there is no path."""
    s, t = g.index_of(source), g.index_of(target)
    if s == t:
        return 0
    indptr, children = g.indptr, g.children
    seen = {s}
    frontier = [s]
    hops = 0
    while frontier:
        hops += 1
        nxt = []
        for u in frontier:
            for v in children[indptr[u] : indptr[u + 1]].tolist():
                if v == t:
                    return hops
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return None


def bfs_distances(g: DerivationGraph, source: int) -> dict[int, int]:
    indptr, children = g.indptr, g.children
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in children[indptr[u] : indptr[u + 1]].tolist():
            if v not in dist:
                dist[v] = du
                queue.append(v)
    return dist


def derivation_depth(g: DerivationGraph) -> int:
    """Max over nodes ``u`` and targets ``t`` inside ``u`` of the hops needed
    to get from ``u`` to ``t`` (unreachable pairs are skipped)."""
    if g.edge_count == 0:
        return 0
    if g.target_set == LEAVES:
        fast = _partition_depth(g)
        if fast is not None:
            return fast
    return _bfs_depth(g)


def _bfs_depth(g: DerivationGraph) -> int:
    space = g.space
    targets = g.target_indices()
    tlo, thi = space.coords(targets)
    position = {int(t): i for i, t in enumerate(targets.tolist())}
    sources = np.unique(g.parents)
    if g._nodes is not None:
        sources = np.intersect1d(sources, g._nodes)
    slo, shi = space.coords(sources)
    best = 0
    for i, u in enumerate(sources.tolist()):
        dist = bfs_distances(g, u)
        for v, d in dist.items():
            j = position.get(v)
            if j is None or d <= best:
                continue
            if np.all(slo[i] <= tlo[j]) and np.all(thi[j] <= shi[i]):
                best = d
    return best


def _partition_depth(g: DerivationGraph) -> int | None:
    """Exact depth when every parent's children tile it.

    If the children of ``u`` are pairwise disjoint and cover ``u``, each leaf
    of ``u`` lies in exactly one child, so the hop count from ``u`` to its
    farthest leaf is one more than the largest such count among the children.
    Returns ``None`` when the precondition fails anywhere.
    """
    space = g.space
    parents, children = g.parents, g.children
    starts = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
    heads = parents[starts]
    counts = np.diff(np.r_[starts, len(parents)])

    hlo, hhi = space.coords(heads)
    clo, chi = space.coords(children)
    if not np.all((np.repeat(hlo, counts, axis=0) <= clo) & (chi <= np.repeat(hhi, counts, axis=0))):
        return None
    cvol = np.prod(chi - clo + 1, axis=1)
    if not np.array_equal(np.add.reduceat(cvol, starts), np.prod(hhi - hlo + 1, axis=1)):
        return None
    if not _children_disjoint(space.k, starts, counts, clo, chi):
        return None

    # non-leaf children with no way down break the recursion
    has_out = np.zeros(space.size, dtype=bool)
    has_out[heads] = True
    child_leaf = np.all(clo == chi, axis=1)
    if not np.all(child_leaf | has_out[children]):
        return None

    # unknown values sit above any real hop count, so one max-reduction
    # both propagates and flags parents with an unresolved child
    unknown = np.int16(np.iinfo(np.int16).max // 2)
    ecc = np.full(space.size, unknown, dtype=np.int16)
    ecc[children[child_leaf]] = 0
    # parents grouped by out-degree so each round is a dense row max
    buckets = []
    for size in np.unique(counts).tolist():
        rows = starts[counts == size]
        block = children[rows[:, None] + np.arange(size)]
        buckets.append((heads[counts == size], np.ascontiguousarray(block.T).T))
    resolved = 0
    while True:
        done = 0
        for bheads, block in buckets:
            if block.shape[1] <= 8:
                new = ecc[block[:, 0]]
                for j in range(1, block.shape[1]):
                    np.maximum(new, ecc[block[:, j]], out=new)
            else:
                new = ecc[block].max(axis=1)
            new += 1
            new[new > unknown] = unknown
            done += int(np.count_nonzero(new < unknown))
            ecc[bheads] = new
        if done == len(heads):
            return int(ecc[heads].max())
        if done == resolved:
            return None
        resolved = done


def _children_disjoint(k, starts, counts, clo, chi) -> bool:
    if k == 1:
        # edges are sorted by child index, which orders intervals by lo
        same = np.ones(len(clo), dtype=bool)
        same[starts] = False
        return bool(np.all(clo[1:, 0][same[1:]] > chi[:-1, 0][same[1:]]))
    for size in np.unique(counts).tolist():
        if size < 2:
            continue
        rows = starts[counts == size]
        block = rows[:, None] + np.arange(size)[None, :]
        lo, hi = clo[block], chi[block]
        for i in range(size):
            for j in range(i + 1, size):
                apart = np.any((hi[:, i] < lo[:, j]) | (hi[:, j] < lo[:, i]), axis=1)
                if not apart.all():
                    return False
    return True


def longest_path(g: DerivationGraph) -> int:
    """Number of edges on the longest directed path (assumes acyclicity)."""
    if g.edge_count == 0:
        return 0
    parents, children = g.parents, g.children
    starts = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
    heads = parents[starts]
    height = np.zeros(g.space.size, dtype=np.int64)
    for _ in range(g.space.size + 1):
        new = np.maximum.reduceat(height[children], starts) + 1
        if np.array_equal(new, height[heads]):
            return int(height.max())
        height[heads] = new
    raise GraphInvariantError("graph contains a cycle")


def component_count(g: DerivationGraph) -> int:
    """Weakly connected components over the graph's node universe.

    Isolated nodes count, so a leaves-only scheme over ``m`` points has ``m``.
    """
    universe = g.nodes
    n = len(universe)
    if n == 0:
        return 0
    remap = np.searchsorted(universe, g.parents), np.searchsorted(universe, g.children)
    adj = coo_matrix((np.ones(g.edge_count), remap), shape=(n, n))
    count, _ = connected_components(adj, directed=True, connection="weak")
    return int(count)


def stats(g: DerivationGraph) -> SchemeStats:
    degrees = g.out_degrees()
    return SchemeStats(
        node_count=g.node_count,
        edge_count=g.edge_count,
        derivation_depth=derivation_depth(g),
        max_out_degree=int(degrees.max()) if len(degrees) else 0,
        component_count=component_count(g),
    )
