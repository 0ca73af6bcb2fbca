"""Embedding, automorphism and copy counts, plus enumeration of connected
induced subgraphs of C_n^k and the brute-force audits built on them."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator

from .density import (
    Density,
    closed_edge_counts,
    consistent_partition,
    gamma,
    gamma_max,
    gamma_n,
    eta,
)
from .graph_core import (
    Graph,
    HamiltonPowerParams,
    HSubgraph,
    ParameterError,
    build_hamilton_power,
    core_graph,
    decompose,
    induced,
    iter_bits,
)
from .density import induced_edge_counts

DEFAULT_CAP = 10**12


def falling(x: int, y: int) -> int:
    """[x]_y = x (x-1) ... (x-y+1)."""
    return math.perm(x, y) if 0 <= y <= x else 0


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("HAMPOW_THREADS", "1")))
    except ValueError:
        return 1


def _search_order(pattern: Graph) -> list[int]:
    """Non-isolated pattern vertices (0-based): components by lowest label,
    each started at its lowest vertex, then most-connected-to-placed first."""
    rows = pattern.rows
    order: list[int] = []
    placed = 0
    for v in range(pattern.n):
        if placed >> v & 1 or rows[v] == 0:
            continue
        order.append(v)
        placed |= 1 << v
        frontier = rows[v] & ~placed
        while frontier:
            best = max(
                iter_bits(frontier),
                key=lambda u: ((rows[u] & placed).bit_count(), rows[u].bit_count(), -u),
            )
            order.append(best)
            placed |= 1 << best
            frontier = (frontier | rows[best]) & ~placed
    return order


class _Plan:
    def __init__(self, pattern: Graph, host: Graph):
        self.order = _search_order(pattern)
        pos = {v: i for i, v in enumerate(self.order)}
        self.back = [
            [pos[u] for u in iter_bits(pattern.rows[v]) if pos[u] < i] for i, v in enumerate(self.order)
        ]
        host_deg = host.degrees()
        self.allowed = [
            sum(1 << h for h in range(host.n) if host_deg[h] >= pattern.rows[v].bit_count())
            for v in self.order
        ]
        self.isolated = pattern.n - len(self.order)
        self.host_rows = host.rows
        self.host_n = host.n


def _count_subtree(plan: _Plan, first: int | None, cap: int | None) -> int:
    """Embeddings of the non-isolated part, optionally with order[0] -> first."""
    depth = len(plan.order)
    if depth == 0:
        return 1
    rows, back, allowed = plan.host_rows, plan.back, plan.allowed
    images = [0] * depth
    total = 0

    def candidates(i: int, used: int) -> int:
        c = allowed[i] & ~used
        for j in back[i]:
            c &= rows[images[j]]
        return c

    def rec(i: int, used: int):
        nonlocal total
        c = candidates(i, used)
        if i == depth - 1:
            total += c.bit_count()
            return
        while c:
            low = c & -c
            c ^= low
            images[i] = low.bit_length() - 1
            rec(i + 1, used | low)
            if cap is not None and total >= cap:
                return

    if first is None:
        rec(0, 0)
    else:
        if not plan.allowed[0] >> first & 1:
            return 0
        images[0] = first
        if depth == 1:
            return 1
        rec(1, 1 << first)
    return total


def _count_task(args):
    pattern, host, first, cap = args
    return _count_subtree(_Plan(pattern, host), first, cap)


def count_embeddings(pattern: Graph, host: Graph, cap: int | None = DEFAULT_CAP,
                     workers: int | None = None) -> int:
    """Number of edge-preserving injections V(pattern) -> V(host).

    The search stops once ``cap`` embeddings have been seen and returns
    ``cap``; a result equal to ``cap`` therefore means "at least cap".
    Complete hosts are counted in closed form and never capped. Isolated
    pattern vertices are placed last by a falling factorial.
    """
    if pattern.n > host.n:
        return 0
    if host.edge_count == host.n * (host.n - 1) // 2:
        return falling(host.n, pattern.n)
    plan = _Plan(pattern, host)
    used = len(plan.order)
    tail = falling(host.n - used, plan.isolated)
    if tail == 0:
        return 0
    inner_cap = None if cap is None else -(-cap // tail)
    nworkers = worker_count(workers)
    if nworkers > 1 and used > 1:
        tasks = [(pattern, host, h, inner_cap) for h in iter_bits(plan.allowed[0])]
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            inner = sum(pool.map(_count_task, tasks))
    else:
        inner = _count_subtree(plan, None, inner_cap)
    total = inner * tail
    if cap is not None and total >= cap:
        return cap
    return total


def automorphisms(g: Graph) -> int:
    return count_embeddings(g, g, cap=None)


def count_copies(pattern: Graph, host: Graph) -> int:
    y = count_embeddings(pattern, host, cap=None)
    aut = automorphisms(pattern)
    copies, rem = divmod(y, aut)
    assert rem == 0, "embedding count not divisible by automorphism count"
    return copies


@dataclass(frozen=True)
class EmbeddingCount:
    embeddings: int
    automorphisms: int
    copies: int
    capped: bool = False

    def to_json(self) -> dict:
        return {"Y": self.embeddings, "aut": self.automorphisms, "X": self.copies, "capped": self.capped}


def embedding_count(pattern: Graph, host: Graph, cap: int | None = DEFAULT_CAP,
                    workers: int | None = None) -> EmbeddingCount:
    y = count_embeddings(pattern, host, cap, workers)
    capped = cap is not None and y >= cap and host.edge_count != host.n * (host.n - 1) // 2
    aut = automorphisms(pattern)
    if not capped:
        assert y % aut == 0, "embedding count not divisible by automorphism count"
    return EmbeddingCount(y, aut, y // aut, capped)


def copy_ratio(pattern: Graph, host: Graph) -> Fraction:
    """X_F(host) / X_F(K_n) for a pattern on the host's vertex count."""
    complete = Graph.complete_graph(host.n)
    return Fraction(count_copies(pattern, host), count_copies(pattern, complete))


# ---------------------------------------------------------------------------
# connected induced subgraphs


def enumerate_connected_induced(params: HamiltonPowerParams, s_max: int,
                                s_min: int = 3) -> Iterator[frozenset[int]]:
    """Every vertex set S with s_min <= |S| <= s_max and H[S] connected, once each.

    Extension-set enumeration rooted at the smallest vertex of S: a vertex
    joins the extension set only through the first vertex of S that sees it.
    """
    if s_max > params.n:
        raise ParameterError(f"s_max={s_max} exceeds n={params.n}")
    rows = build_hamilton_power(params).rows

    def extend(sub: int, size: int, ext: int, closed: int, above: int):
        if size >= s_min:
            yield frozenset(v + 1 for v in iter_bits(sub))
        if size == s_max:
            return
        while ext:
            low = ext & -ext
            ext ^= low
            w = low.bit_length() - 1
            fresh = rows[w] & ~closed & above
            yield from extend(sub | low, size + 1, ext | fresh, closed | rows[w], above)

    full = (1 << params.n) - 1
    for v in range(params.n):
        above = full & ~((1 << (v + 1)) - 1)
        yield from extend(1 << v, 1, rows[v] & above, rows[v] | (1 << v), above)


def connected_induced_counts(params: HamiltonPowerParams, s_max: int, s_min: int = 1) -> dict[int, int]:
    counts = {s: 0 for s in range(s_min, s_max + 1)}
    for s in enumerate_connected_induced(params, s_max, s_min):
        counts[len(s)] += 1
    return counts


def is_connected(g: Graph) -> bool:
    return len(decompose(g).components) <= 1


def connected_induced_bruteforce(params: HamiltonPowerParams, s: int) -> set[frozenset[int]]:
    h = build_hamilton_power(params)
    return {
        frozenset(c) for c in combinations(range(1, params.n + 1), s) if is_connected(induced(h, c))
    }


# ---------------------------------------------------------------------------
# audits


def maximality_audit(n: int, k: int) -> dict:
    """Exhaustively check e(H[S]) <= e(H_|S|) over all vertex subsets S."""
    if n > 20:
        raise ParameterError(f"maximality audit enumerates 2^n subsets; n={n} > 20 is refused")
    params = HamiltonPowerParams(n, k)
    h = build_hamilton_power(params)
    counts = induced_edge_counts(h)
    target = [0] + [closed_edge_counts(n, k, s)[1] for s in range(1, n + 1)]
    best = [0] * (n + 1)
    maximizers = [0] * (n + 1)
    violations = []
    for s_mask, e in enumerate(counts):
        size = s_mask.bit_count()
        if e > target[size]:
            violations.append({"subset": [v + 1 for v in iter_bits(s_mask)], "edges": e, "bound": target[size]})
        if e > best[size]:
            best[size], maximizers[size] = e, 1
        elif e == best[size]:
            maximizers[size] += 1
    intervals_maximal = all(counts[(1 << s) - 1] == best[s] for s in range(1, n + 1))
    return {
        "n": n,
        "k": k,
        "subsets": len(counts),
        "violations": violations,
        "max_edges": {s: best[s] for s in range(1, n + 1)},
        "maximizer_counts": {s: maximizers[s] for s in range(1, n + 1)},
        "intervals_maximal": intervals_maximal,
    }


@dataclass(frozen=True)
class EmbeddingBoundAudit:
    y: int
    bound: int
    ok: bool
    capped: bool
    parts: int
    core_components: int
    removals: int


def embedding_bound_audit(f_core: HSubgraph, cap: int | None = DEFAULT_CAP) -> EmbeddingBoundAudit:
    """Compare Y_{F°}(H) with [n]_{c(F°)} (4k)^{|D(F°)|} for the constructed partition.

    When the count hits ``cap`` below the bound the check is reported as not
    falsified (ok=True, capped=True).
    """
    p = f_core.params
    g = f_core.graph()
    core = core_graph(g)
    part = consistent_partition(f_core)
    c = decompose(g).core_components
    bound = falling(p.n, c) * (4 * p.k) ** len(part)
    host = build_hamilton_power(p)
    y = count_embeddings(core, host, cap)
    capped = cap is not None and y >= cap
    ok = y <= bound
    return EmbeddingBoundAudit(y, bound, ok, capped, len(part), c, part.removals)


def dense_connected_count_audit(n: int, k: int, s: int, zeta: float, b: float) -> dict:
    """Count connected *induced* zeta-dense s-vertex subgraphs of C_n^k and
    compare with n * eta^s. Only induced subgraphs are counted."""
    params = HamiltonPowerParams(n, k)
    h = build_hamilton_power(params)
    target = gamma_n(n, k) - Fraction(zeta)
    count = 0
    for vs in enumerate_connected_induced(params, s, s):
        gv = gamma(induced(h, vs))
        if gv.defined and gv >= target:
            count += 1
    bound = n * eta(zeta, k, b) ** s
    return {"n": n, "k": k, "s": s, "count": count, "bound": bound, "ok": count <= bound}


def enumeration_gamma_audit(params: HamiltonPowerParams, s_max: int) -> list[dict]:
    """gamma(H[S]) <= gamma(|S|) for every enumerated connected induced S."""
    h = build_hamilton_power(params)
    bad = []
    for vs in enumerate_connected_induced(params, s_max):
        gv = gamma(induced(h, vs))
        top: Density = gamma_max(params.n, params.k, len(vs))
        if gv.defined and gv > top:
            bad.append({"vertices": sorted(vs), "gamma": str(gv), "gamma_s": str(top)})
    return bad
