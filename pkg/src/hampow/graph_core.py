"""Graphs on labelled vertex sets, powers of cycles and paths, and the
component bookkeeping (cores, ranks, completions) used by the density and
counting machinery.

Vertices are 1-based at every public boundary. Internally a graph on ``n``
vertices stores ``n`` adjacency rows as Python ints used as bitsets, where
bit ``j`` of row ``i`` means internal vertices ``i`` and ``j`` are adjacent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class ParameterError(ValueError):
    """Invalid construction parameters (vertex counts, powers, labels)."""


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices 1..n.

    ``labels`` records, for each vertex, the label it had in the graph it was
    cut out of (identity for freshly built graphs).
    """

    n: int
    rows: tuple[int, ...]
    edge_count: int
    labels: tuple[int, ...] = ()
    complete: bool = False

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ParameterError("row count does not match n")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.n + 1)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> Graph:
        if n < 0:
            raise ParameterError(f"n must be non-negative, got {n}")
        rows = [0] * n
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParameterError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ParameterError(f"self-loop at {u}")
            rows[u - 1] |= 1 << (v - 1)
            rows[v - 1] |= 1 << (u - 1)
        return cls.from_rows(rows, labels)

    @classmethod
    def from_rows(cls, rows, labels=None) -> Graph:
        rows = tuple(rows)
        m = sum(r.bit_count() for r in rows)
        return cls(len(rows), rows, m // 2, tuple(labels) if labels else ())

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, (0,) * n, 0)

    @classmethod
    def complete_graph(cls, n: int) -> Graph:
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)), n * (n - 1) // 2, complete=True)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] >> (v - 1) & 1)

    def degree(self, v: int) -> int:
        return self.rows[v - 1].bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def neighbors(self, v: int) -> list[int]:
        return [j + 1 for j in iter_bits(self.rows[v - 1])]

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i, row in enumerate(self.rows):
            for j in iter_bits(row >> (i + 1)):
                out.append((i + 1, i + j + 2))
        return out

    def is_subgraph_of(self, other: Graph) -> bool:
        return self.n == other.n and all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def union(self, other: Graph) -> Graph:
        if self.n != other.n:
            raise ParameterError("union needs graphs on the same vertex set")
        return Graph.from_rows((a | b for a, b in zip(self.rows, other.rows)), self.labels)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, data: dict | str) -> Graph:
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_edges(int(data["n"]), [tuple(e) for e in data["edges"]])


@dataclass(frozen=True)
class HamiltonPowerParams:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 3:
            raise ParameterError(f"n must be at least 3, got {self.n}")
        if self.k < 1:
            raise ParameterError(f"k must be at least 1, got {self.k}")

    @property
    def is_complete(self) -> bool:
        return self.n <= 2 * self.k + 1

    @property
    def max_degree(self) -> int:
        return 2 * self.k

    @property
    def edge_count(self) -> int:
        return self.n * (self.n - 1) // 2 if self.is_complete else self.k * self.n

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2

    def require_indexable(self):
        if self.is_complete:
            raise ParameterError(
                f"canonical edge ids need n >= 2k+2 (n={self.n}, k={self.k}); H is complete"
            )

    def edge_endpoints(self, eid: int) -> tuple[int, int]:
        """Endpoints (v, v+i mod n), 1-based, of canonical edge id k(v-1)+(i-1)."""
        v0, i0 = divmod(eid, self.k)
        return v0 + 1, (v0 + i0 + 1) % self.n + 1

    def edge_id(self, u: int, v: int) -> int:
        n, k = self.n, self.k
        d = (v - u) % n
        if 1 <= d <= k:
            return k * (u - 1) + d - 1
        d = (u - v) % n
        if 1 <= d <= k:
            return k * (v - 1) + d - 1
        raise ParameterError(f"{{{u}, {v}}} is not an edge of C_{n}^{k}")


def _cycle_power_rows(n: int, k: int) -> list[int]:
    rows = [0] * n
    for v in range(n):
        for i in range(1, k + 1):
            w = (v + i) % n
            if w != v:
                rows[v] |= 1 << w
                rows[w] |= 1 << v
    return rows


def build_hamilton_power(params: HamiltonPowerParams) -> Graph:
    """The k-th power of the cycle 1, 2, ..., n (complete when n <= 2k+1)."""
    if params.is_complete:
        return Graph.complete_graph(params.n)
    return Graph.from_rows(_cycle_power_rows(params.n, params.k))


def build_path_power(s: int, k: int) -> Graph:
    if s < 1:
        raise ParameterError(f"s must be at least 1, got {s}")
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    rows = [0] * s
    for v in range(s):
        for w in range(v + 1, min(s, v + k + 1)):
            rows[v] |= 1 << w
            rows[w] |= 1 << v
    return Graph.from_rows(rows)


def build_prefix(params: HamiltonPowerParams, s: int) -> Graph:
    """H_s: the subgraph of C_n^k induced by {1, ..., s}."""
    if not 1 <= s <= params.n:
        raise ParameterError(f"s must lie in [1, {params.n}], got {s}")
    return induced(build_hamilton_power(params), range(1, s + 1))


def induced(g: Graph, vertex_set: Iterable[int]) -> Graph:
    """Induced subgraph, relabelled 1..m in increasing order of the old labels.

    The result's ``labels`` map each new vertex to its label in ``g.labels``.
    """
    vs = sorted(set(vertex_set))
    for v in vs:
        if not 1 <= v <= g.n:
            raise ParameterError(f"vertex {v} out of range for n={g.n}")
    pos = {v - 1: i for i, v in enumerate(vs)}
    rows = []
    for v in vs:
        r = 0
        for j in iter_bits(g.rows[v - 1]):
            i = pos.get(j)
            if i is not None:
                r |= 1 << i
        rows.append(r)
    return Graph.from_rows(rows, [g.labels[v - 1] for v in vs])


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    """g1 on 1..n1 followed by g2 shifted to n1+1..n1+n2; labels carried over."""
    shift = g1.n
    rows = list(g1.rows) + [r << shift for r in g2.rows]
    return Graph.from_rows(rows, g1.labels + g2.labels)


def components(g: Graph) -> list[frozenset[int]]:
    """Connected components as 1-based vertex sets, ordered by smallest vertex."""
    seen = 0
    out = []
    for start in range(g.n):
        if seen >> start & 1:
            continue
        comp = frontier = 1 << start
        while frontier:
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= g.rows[v]
            frontier = nxt & ~comp
            comp |= frontier
        seen |= comp
        out.append(frozenset(v + 1 for v in iter_bits(comp)))
    return out


def component_masks(g: Graph) -> list[int]:
    return [sum(1 << (v - 1) for v in c) for c in components(g)]


@dataclass(frozen=True)
class Decomposition:
    components: tuple[frozenset[int], ...]
    core_vertices: frozenset[int]
    rank: int
    core_rank: int
    core_components: int
    core_edges: int
    is_good: bool

    @property
    def component_count(self) -> int:
        return len(self.components)

    @property
    def core_components_list(self) -> list[frozenset[int]]:
        return [c for c in self.components if len(c) > 2]


def decompose(g: Graph) -> Decomposition:
    comps = components(g)
    core = [c for c in comps if len(c) > 2]
    core_vertices = frozenset().union(*core) if core else frozenset()
    core_mask = sum(1 << (v - 1) for v in core_vertices)
    core_edges = sum((g.rows[v - 1] & core_mask).bit_count() for v in core_vertices) // 2
    return Decomposition(
        components=tuple(comps),
        core_vertices=core_vertices,
        rank=g.n - len(comps),
        core_rank=len(core_vertices) - len(core),
        core_components=len(core),
        core_edges=core_edges,
        is_good=all(len(c) != 2 for c in comps),
    )


def core_graph(g: Graph) -> Graph:
    """F° as a graph on its own vertices (labels point back into ``g``)."""
    return induced(g, sorted(decompose(g).core_vertices))


@dataclass(frozen=True)
class HSubgraph:
    """A spanning subgraph F of H = C_n^k given by a mask over H's edge ids."""

    params: HamiltonPowerParams
    mask: int
    _graph: Graph | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.params.require_indexable()
        if self.mask < 0 or self.mask >> (self.params.k * self.params.n):
            raise ParameterError("mask has bits beyond the kn edge ids of H")

    @classmethod
    def from_edges(cls, params: HamiltonPowerParams, edges: Iterable[tuple[int, int]]) -> HSubgraph:
        mask = 0
        for u, v in edges:
            mask |= 1 << params.edge_id(u, v)
        return cls(params, mask)

    @classmethod
    def induced_on(cls, params: HamiltonPowerParams, vertex_sets: Iterable[Iterable[int]]) -> HSubgraph:
        """Union of H[S] over the given vertex sets."""
        mask = 0
        for s in vertex_sets:
            mask |= _induced_mask(params, set(s))
        return cls(params, mask)

    @classmethod
    def full(cls, params: HamiltonPowerParams) -> HSubgraph:
        return cls(params, (1 << (params.k * params.n)) - 1)

    @property
    def edge_ids(self) -> list[int]:
        return list(iter_bits(self.mask))

    @property
    def edge_count(self) -> int:
        return self.mask.bit_count()

    def graph(self) -> Graph:
        if self._graph is None:
            p = self.params
            g = Graph.from_edges(p.n, (p.edge_endpoints(e) for e in iter_bits(self.mask)))
            object.__setattr__(self, "_graph", g)
        return self._graph

    def to_json(self) -> dict:
        d = self.graph().to_json()
        d["k"] = self.params.k
        d["mask_hex"] = format(self.mask, "x")
        return d

    @classmethod
    def from_json(cls, data: dict | str) -> HSubgraph:
        if isinstance(data, str):
            data = json.loads(data)
        params = HamiltonPowerParams(int(data["n"]), int(data["k"]))
        if "mask_hex" in data:
            return cls(params, int(data["mask_hex"], 16))
        return cls.from_edges(params, [tuple(e) for e in data["edges"]])


def _induced_mask(params: HamiltonPowerParams, vs: set[int]) -> int:
    mask = 0
    for v in vs:
        for i in range(1, params.k + 1):
            w = (v - 1 + i) % params.n + 1
            if w in vs:
                mask |= 1 << (params.k * (v - 1) + i - 1)
    return mask


def completion(f: HSubgraph) -> HSubgraph:
    """F*: union of H[V(C)] over the components C of F."""
    p = f.params
    comp_of = {}
    for idx, c in enumerate(components(f.graph())):
        for v in c:
            comp_of[v] = idx
    mask = 0
    for eid in range(p.k * p.n):
        u, v = p.edge_endpoints(eid)
        if comp_of[u] == comp_of[v]:
            mask |= 1 << eid
    return HSubgraph(p, mask)


def is_good(g: Graph) -> bool:
    return decompose(g).is_good
