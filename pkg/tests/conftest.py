from __future__ import annotations

import random
from itertools import permutations

import pytest

from hampow.graph_core import Graph, HamiltonPowerParams, HSubgraph


def cyclic_distance(u: int, v: int, n: int) -> int:
    d = abs(u - v) % n
    return min(d, n - d)


def naive_power_edges(n: int, k: int) -> set[frozenset[int]]:
    """Edges of C_n^k straight from the distance definition."""
    return {
        frozenset((u, v))
        for u in range(1, n + 1)
        for v in range(u + 1, n + 1)
        if cyclic_distance(u, v, n) <= k
    }


def edge_set(g: Graph) -> set[frozenset[int]]:
    return {frozenset(e) for e in g.edges()}


def permutation_automorphisms(g: Graph) -> int:
    """Count vertex permutations preserving the edge set (independent of the backtracker)."""
    edges = edge_set(g)
    verts = list(range(1, g.n + 1))
    count = 0
    for perm in permutations(verts):
        image = dict(zip(verts, perm))
        if all(frozenset((image[u], image[v])) in edges for u, v in map(tuple, edges)):
            count += 1
    return count


def permutation_embeddings(pattern: Graph, host: Graph) -> int:
    pe = [tuple(e) for e in pattern.edges()]
    he = edge_set(host)
    count = 0
    for perm in permutations(range(1, host.n + 1), pattern.n):
        if all(frozenset((perm[u - 1], perm[v - 1])) in he for u, v in pe):
            count += 1
    return count


def random_interval_union(rng: random.Random, params: HamiltonPowerParams, min_len: int = 1,
                          max_len: int | None = None, max_parts: int = 3) -> list[list[int]]:
    """Disjoint cyclic intervals separated by at least one unused vertex."""
    n = params.n
    max_len = max_len or n
    pos = rng.randrange(n)
    used = 0
    sets = []
    for _ in range(rng.randint(1, max_parts)):
        m = rng.randint(min_len, max_len)
        if used + m + (1 if sets else 0) > n - 1:
            break
        sets.append([((pos + i) % n) + 1 for i in range(m)])
        gap = rng.randint(1, 3)
        pos += m + gap
        used += m + gap
    return sets


def random_hsubgraph(rng: random.Random, params: HamiltonPowerParams, density: float = 0.5) -> HSubgraph:
    mask = 0
    for e in range(params.k * params.n):
        if rng.random() < density:
            mask |= 1 << e
    return HSubgraph(params, mask)


@pytest.fixture
def rng():
    return random.Random(20240611)
