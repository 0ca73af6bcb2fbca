"""Random graph sampling, the G(n,p) -> G(n,M) coupling, exact search for a
spanning k-th power of a Hamilton cycle, planted instances and threshold
sweeps."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .embeddings import worker_count
from .graph_core import Graph, ParameterError

MASK64 = (1 << 64) - 1
DEFAULT_BUDGET = 10**8


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master: int, trial: int, grid_index: int) -> int:
    return splitmix64(splitmix64(splitmix64(master & MASK64) ^ grid_index) ^ trial)


@dataclass(frozen=True)
class RandomGraphSpec:
    n: int
    model: str  # "gnp" | "gnm"
    param: float  # p for gnp, M for gnm
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")
        N = self.n * (self.n - 1) // 2
        if self.model == "gnp":
            if not 0 <= self.param <= 1:
                raise ParameterError(f"p must lie in [0, 1], got {self.param}")
        elif self.model == "gnm":
            if self.param != int(self.param) or not 0 <= self.param <= N:
                raise ParameterError(f"M must be an integer in [0, {N}], got {self.param}")
        else:
            raise ParameterError(f"unknown model {self.model!r}")


def _pairs(n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    return np.stack(iu, axis=1)


def _graph_from_pair_ids(n: int, ids) -> Graph:
    pairs = _pairs(n)[np.asarray(ids, dtype=np.int64)]
    adj = np.zeros((n, n), dtype=bool)
    adj[pairs[:, 0], pairs[:, 1]] = True
    adj[pairs[:, 1], pairs[:, 0]] = True
    packed = np.packbits(adj, axis=1, bitorder="little")
    return Graph.from_rows(int.from_bytes(row.tobytes(), "little") for row in packed)


def _pair_ids_of(g: Graph) -> np.ndarray:
    n = g.n
    ids = [u * n - u * (u + 1) // 2 + (v - u - 1) for u, v in ((a - 1, b - 1) for a, b in g.edges())]
    return np.asarray(ids, dtype=np.int64)


def sample(spec: RandomGraphSpec, rng: np.random.Generator | None = None) -> Graph:
    """G(n,p) by independent coins over the lexicographic pair list, G(n,M)
    by a uniform M-subset of pair ids."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    N = spec.n * (spec.n - 1) // 2
    if spec.model == "gnp":
        ids = np.flatnonzero(rng.random(N) < spec.param)
    else:
        ids = rng.choice(N, size=int(spec.param), replace=False)
    return _graph_from_pair_ids(spec.n, ids)


def couple_subsample(g: Graph, M: int, seed: int | np.random.Generator) -> Graph:
    """Exactly M edges: a uniform M-subset of g when e(g) >= M, otherwise g
    plus a uniform (M - e(g))-subset of the non-edges."""
    n = g.n
    N = n * (n - 1) // 2
    if not 0 <= M <= N:
        raise ParameterError(f"M must lie in [0, {N}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    have = _pair_ids_of(g)
    if len(have) >= M:
        keep = rng.choice(len(have), size=M, replace=False)
        return _graph_from_pair_ids(n, have[keep])
    others = np.setdiff1d(np.arange(N), have)
    extra = others[rng.choice(len(others), size=M - len(have), replace=False)]
    return _graph_from_pair_ids(n, np.concatenate([have, extra]))


@dataclass(frozen=True)
class SearchOutcome:
    status: str  # "found" | "absent" | "timeout"
    witness: tuple[int, ...] | None
    nodes: int


def verify_witness(g: Graph, k: int, order) -> bool:
    """Every pair at cyclic distance <= k in ``order`` (1-based) is an edge of g."""
    n = g.n
    if sorted(order) != list(range(1, n + 1)):
        return False
    for i in range(n):
        for d in range(1, k + 1):
            j = (i + d) % n
            if j != i and not g.has_edge(order[i], order[j]):
                return False
    return True


class _Timeout(Exception):
    pass


def find_spanning_power(g: Graph, k: int, budget: int = DEFAULT_BUDGET) -> SearchOutcome:
    """Exact backtracking for a cyclic order whose k-th power lies in g.

    Vertex 1 is fixed at position 0 and the reflection is removed by
    requiring order[1] < order[n-1]. Position i must be adjacent to the
    placed positions within cyclic distance k, including the wrap-around
    windows once i >= n-k.
    """
    n = g.n
    if n < 3:
        raise ParameterError("need n >= 3")
    if k < 1:
        raise ParameterError("need k >= 1")
    need = min(2 * k, n - 1)
    if min(g.degrees()) < need:
        return SearchOutcome("absent", None, 0)
    rows = g.rows
    order = [0] * n
    order[0] = 0
    nodes = 0
    # back[i]: earlier positions that must be adjacent to position i
    back = []
    for i in range(n):
        req = {j for j in range(max(0, i - k), i)}
        req |= {j for j in range(i) if (j - i) % n <= k}
        back.append(sorted(req))

    def rec(i: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _Timeout
        if i == n:
            return True
        c = ~used & ((1 << n) - 1)
        for j in back[i]:
            c &= rows[order[j]]
        if i == n - 1:
            c &= ~((1 << (order[1] + 1)) - 1)
        while c:
            low = c & -c
            c ^= low
            v = low.bit_length() - 1
            order[i] = v
            if rec(i + 1, used | low):
                return True
        return False

    try:
        ok = rec(1, 1)
    except _Timeout:
        return SearchOutcome("timeout", None, nodes)
    if ok:
        witness = tuple(v + 1 for v in order)
        assert verify_witness(g, k, witness), "search produced an invalid witness"
        return SearchOutcome("found", witness, nodes)
    return SearchOutcome("absent", None, nodes)


def bruteforce_contains_power(g: Graph, k: int) -> bool:
    """Try every cyclic order starting at vertex 1 (n <= 9 is practical)."""
    from itertools import permutations

    n = g.n
    for rest in permutations(range(2, n + 1)):
        if verify_witness(g, k, (1,) + rest):
            return True
    return False


def plant(spec: RandomGraphSpec, k: int, rng: np.random.Generator | None = None) -> tuple[Graph, tuple[int, ...]]:
    """Sample the base graph and add the k-th power of a uniformly random cyclic order."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    base = sample(spec, rng)
    n = spec.n
    order = tuple(int(v) + 1 for v in rng.permutation(n))
    rows = list(base.rows)
    for i in range(n):
        for d in range(1, k + 1):
            u, v = order[i] - 1, order[(i + d) % n] - 1
            if u != v:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return Graph.from_rows(rows), order


@dataclass(frozen=True)
class TrialRecord:
    spec: RandomGraphSpec
    k: int
    outcome: SearchOutcome
    elapsed: float


def run_trial(spec: RandomGraphSpec, k: int, budget: int, planted: bool = False) -> TrialRecord:
    rng = np.random.default_rng(spec.seed)
    start = time.perf_counter()
    if planted:
        g, _ = plant(spec, k, rng)
    else:
        g = sample(spec, rng)
    outcome = find_spanning_power(g, k, budget)
    return TrialRecord(spec, k, outcome, time.perf_counter() - start)


@dataclass(frozen=True)
class SweepConfig:
    n: int
    k: int
    grid: tuple[float, ...]
    trials: int
    seed: int = 0
    model: str = "gnp"
    budget: int = DEFAULT_BUDGET
    planted: bool = False
    workers: int | None = None

    @property
    def p_star(self) -> float:
        return (math.e / self.n) ** (1 / self.k)


@dataclass(frozen=True)
class SweepRow:
    grid_value: float
    trials: int
    found: int
    absent: int
    timeout: int
    mean_nodes: float
    p_star_reference: float

    @property
    def found_frequency(self) -> float:
        return self.found / self.trials if self.trials else 0.0


def _grid_task(args) -> tuple[int, int, int, int]:
    cfg, gi, value = args
    found = absent = timeout = nodes = 0
    for t in range(cfg.trials):
        spec = RandomGraphSpec(cfg.n, cfg.model, value, trial_seed(cfg.seed, t, gi))
        rec = run_trial(spec, cfg.k, cfg.budget, cfg.planted)
        status = rec.outcome.status
        found += status == "found"
        absent += status == "absent"
        timeout += status == "timeout"
        nodes += rec.outcome.nodes
    return found, absent, timeout, nodes


def sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Aggregate trial outcomes per grid value; rows come out in grid order
    and depend only on the master seed, never on the worker count."""
    tasks = [(cfg, gi, value) for gi, value in enumerate(cfg.grid)]
    nworkers = worker_count(cfg.workers)
    if nworkers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(_grid_task, tasks))
    else:
        results = [_grid_task(t) for t in tasks]
    rows = []
    for value, (found, absent, timeout, nodes) in zip(cfg.grid, results):
        rows.append(SweepRow(value, cfg.trials, found, absent, timeout,
                             nodes / cfg.trials if cfg.trials else 0.0, cfg.p_star))
    return rows
