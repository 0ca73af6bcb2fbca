"""Exact densities of subgraphs of C_n^k, the thresholds derived from them,
and consistent partitions of dense cores.

All comparisons are done on :class:`fractions.Fraction`; irrational
thresholds (square roots) are compared by squaring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Union

from .graph_core import (
    Graph,
    HamiltonPowerParams,
    HSubgraph,
    ParameterError,
    build_hamilton_power,
    completion,
    decompose,
    induced,
    iter_bits,
)


class DensityPreconditionError(ValueError):
    """An audit was asked to run on an input outside its hypotheses."""


@dataclass(frozen=True)
class Density:
    numerator: int
    denominator: int
    defined: bool = True

    @classmethod
    def of(cls, num: int, den: int) -> Density:
        q = Fraction(num, den)
        return cls(q.numerator, q.denominator, True)

    @classmethod
    def undefined(cls) -> Density:
        return cls(0, 1, False)

    @property
    def value(self) -> Fraction:
        if not self.defined:
            raise ValueError("density is undefined (the core has no edges)")
        return Fraction(self.numerator, self.denominator)

    def __lt__(self, other):
        return self.value < _as_fraction(other)

    def __le__(self, other):
        return self.value <= _as_fraction(other)

    def __gt__(self, other):
        return self.value > _as_fraction(other)

    def __ge__(self, other):
        return self.value >= _as_fraction(other)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}" if self.defined else "undefined"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Density):
        return x.value
    return Fraction(x)


GraphLike = Union[Graph, HSubgraph]


def _graph_of(f: GraphLike) -> Graph:
    return f.graph() if isinstance(f, HSubgraph) else f


def closed_edge_counts(n: int, k: int, s: int) -> tuple[int, int]:
    """(e(P_s), e(H_s)) for the k-th powers of the path on [s] and of C_n."""
    if not 1 <= s <= n:
        raise ParameterError(f"s must lie in [1, {n}], got {s}")
    if s <= k + 1:
        e_path = math.comb(s, 2)
    else:
        e_path = k * s - math.comb(k + 1, 2)
    e_prefix = e_path
    if s > n - k:
        e_prefix += math.comb(s - (n - k - 1), 2)
    return e_path, e_prefix


def gamma_n(n: int, k: int) -> Fraction:
    """Density of the whole of C_n^k, kn/(n-2) once n >= 2k+2."""
    return gamma_max(n, k, n).value


def gamma(f: GraphLike) -> Density:
    d = decompose(_graph_of(f))
    if d.core_edges == 0:
        return Density.undefined()
    return Density.of(d.core_edges, d.core_rank - d.core_components)


def component_density(g: Graph, comp) -> Density:
    """Density of a single connected component with at least three vertices."""
    sub = induced(g, comp)
    return Density.of(sub.edge_count, sub.n - 2)


def mu_weights(f: GraphLike) -> list[tuple[frozenset[int], Fraction, Density]]:
    """Components C of F° with weights (|C|-2)/sum(|C'|-2) and their densities.

    The weighted mean of the component densities equals ``gamma(f)``.
    """
    g = _graph_of(f)
    core = decompose(g).core_components_list
    total = sum(len(c) - 2 for c in core)
    return [(c, Fraction(len(c) - 2, total), component_density(g, c)) for c in core]


def gamma_max(n: int, k: int, s: int) -> Density:
    """gamma(s) = gamma(H_s), the largest density of an s-vertex subgraph of C_n^k."""
    if s < 3:
        raise ParameterError(f"gamma(s) needs s >= 3, got {s}")
    _, e = closed_edge_counts(n, k, s)
    return Density.of(e, s - 2)


def gamma_monotone_audit(n: int, k: int) -> dict:
    """Check gamma(H_3) = gamma(H_4) = 3 and strict increase of gamma(H_s) on 4 <= s <= n."""
    values = {s: gamma_max(n, k, s).value for s in range(3, n + 1)}
    violations = []
    for s in range(4, n):
        if not values[s + 1] > values[s]:
            violations.append({"s": s, "gamma_s": str(values[s]), "gamma_next": str(values[s + 1])})
    base_ok = values[3] == 3 and values.get(4) == 3
    return {"k": k, "n": n, "base_ok": base_ok, "violations": violations}


@dataclass(frozen=True)
class DensityClass:
    kind: str  # "dense" | "sparse" | "empty"
    relative: str = "not_applicable"  # "completion_dense" | "completion_sparse" | "not_applicable"


def classify(f: HSubgraph, zeta, relative_to_completion: bool = False) -> DensityClass:
    zeta = Fraction(zeta)
    if not 0 < zeta < 1:
        raise ParameterError("zeta must lie in (0, 1)")
    g = f.graph()
    if g.edge_count == 0:
        return DensityClass("empty")
    gf = gamma(f)
    target = gamma_n(f.params.n, f.params.k) - zeta
    kind = "dense" if gf.defined and gf >= target else "sparse"
    relative = "not_applicable"
    if relative_to_completion:
        if gf.defined and gf >= (1 - zeta) * gamma(completion(f)).value:
            relative = "completion_dense"
        else:
            relative = "completion_sparse"
    return DensityClass(kind, relative)


def _gt_minus_sqrt(lhs: Fraction, rhs: Fraction, zp: Fraction) -> bool:
    """lhs > rhs - sqrt(zp), decided exactly."""
    gap = rhs - lhs
    return gap < 0 or gap * gap < zp


@dataclass(frozen=True)
class ThresholdOrders:
    L: int
    B: int
    L_times_zeta: float
    B_times_sqrt_zeta: float


def thresholds(n: int, k: int, zeta_prime) -> ThresholdOrders:
    """L = min{s : gamma(s) >= gamma(n) - z'} and B = min{s : gamma(s) > gamma(n) - sqrt(z')}."""
    zp = Fraction(zeta_prime)
    gn = gamma_n(n, k)
    if zp <= 0:
        raise ParameterError("zeta' must be positive")
    if zp >= gn - 3:
        raise ParameterError(f"zeta'={zp} is so large that L = 3 (needs zeta' < gamma(n) - 3)")
    L = B = None
    for s in range(3, n + 1):
        g = gamma_max(n, k, s).value
        if L is None and g >= gn - zp:
            L = s
        if B is None and _gt_minus_sqrt(g, gn, zp):
            B = s
        if L is not None and B is not None:
            break
    return ThresholdOrders(L, B, L * float(zp), B * math.sqrt(zp))


def threshold_orders_closed(k: int, zeta_prime: float, delta: float = 0.0) -> tuple[float, float]:
    """L and B from the path-power density k - c/(s-2), c = k(k-3)/2.

    ``delta`` is gamma(n) - k = 2k/(n-2). Valid while both orders land in
    [k+1, n-k]; returns floats so astronomically large orders stay finite.
    """
    c = k * (k - 3) / 2
    if c <= 0:
        raise ParameterError("closed-form thresholds need k >= 4")
    if zeta_prime <= delta:
        return math.inf, math.inf
    L = 2 + math.ceil(c / (zeta_prime - delta))
    root = math.sqrt(zeta_prime)
    B = math.inf if root <= delta else 2 + math.floor(c / (root - delta)) + 1
    return float(max(L, 3)), float(max(B, 3))


@dataclass(frozen=True)
class SparseComponentAudit:
    count: int
    bound: Fraction
    ok: bool


def sparse_component_audit(f: HSubgraph, gamma_prime, zeta_prime) -> SparseComponentAudit:
    """Count components of F° with density <= gamma' against z'|F°|/(gamma(n) - gamma')."""
    gp, zp = _as_fraction(gamma_prime), Fraction(zeta_prime)
    gn = gamma_n(f.params.n, f.params.k)
    gf = gamma(f)
    if not gf.defined or gf < gn - zp:
        raise DensityPreconditionError(f"F is not {zp}-dense (gamma(F)={gf}, gamma(n)={gn})")
    if gp > gn - zp:
        raise DensityPreconditionError("gamma' must not exceed gamma(n) - zeta'")
    g = f.graph()
    weights = mu_weights(g)
    core_order = sum(len(c) for c, _, _ in weights)
    count = sum(1 for _, _, d in weights if d <= gp)
    bound = zp * core_order / (gn - gp)
    return SparseComponentAudit(count, bound, count <= bound)


@dataclass(frozen=True)
class ConsistentPartition:
    parts: tuple[tuple[int, ...], ...]
    removals: int

    def __len__(self):
        return len(self.parts)


def consistent_partition(f_core: HSubgraph) -> ConsistentPartition:
    """Refine a single cyclic part by deleting, in increasing id order, the
    edges of the cycle power H' on V(F°) that F° lacks.

    V(F°) is the set of non-isolated vertices of ``f_core``. Pieces of at
    most 2k vertices are broken into singletons. Every final part D of size
    at least 2k+1 is a cyclic interval of C_n with F°[D] = H[D], a copy of
    H_|D|.
    """
    p = f_core.params
    n, k = p.n, p.k
    g = f_core.graph()
    d = decompose(g)
    if any(len(c) == 2 for c in d.components):
        raise DensityPreconditionError("input has an isolated edge; pass a core F°")
    verts = sorted(d.core_vertices)
    m = len(verts)
    if m == 0:
        return ConsistentPartition((), 0)
    rows = g.rows
    adj = lambda x, y: bool(rows[verts[x] - 1] >> (verts[y] - 1) & 1)

    if m <= 2 * k:
        removals = math.comb(m, 2) - g.edge_count
        return ConsistentPartition(tuple((v,) for v in verts), removals)

    def in_h(x: int, y: int) -> bool:
        dist = (verts[y] - verts[x]) % n
        return min(dist, n - dist) <= k

    missing = []
    for j in range(m):
        for i in range(1, k + 1):
            y = (j + i) % m
            if not adj(j, y):
                missing.append((j, y))

    # part id -> arc (list of positions); cyclic part is id 0 with arc None
    arcs: dict[int, list[int] | None] = {0: None}
    part_of = [0] * m
    where = [0] * m  # index within arc for linear parts
    next_id = [1]

    def required(arc: list[int], x: int, y: int) -> bool:
        return abs(where[x] - where[y]) <= k or in_h(x, y)

    def place(arc: list[int]) -> list[list[int]]:
        if len(arc) <= 2 * k:
            return [[x] for x in arc]
        return [arc]

    def install(pieces: list[list[int]]):
        for arc in pieces:
            pid = next_id[0]
            next_id[0] += 1
            arcs[pid] = arc
            for idx, x in enumerate(arc):
                part_of[x] = pid
                where[x] = idx

    def missing_required_on(arc: list[int]) -> int:
        pos = {x: i for i, x in enumerate(arc)}
        cnt = 0
        for a, b in missing:
            if a in pos and b in pos and (abs(pos[a] - pos[b]) <= k or in_h(a, b)):
                cnt += 1
        return cnt

    def split_linear(pid: int, x: int, y: int):
        arc = arcs.pop(pid)
        a, b = sorted((where[x], where[y]))
        best = None
        for t in range(a, b):
            pieces = place(arc[: t + 1]) + place(arc[t + 1:])
            if best is None or len(pieces) < len(best):
                best = pieces
        install(best)

    for x, y in missing:
        pid = part_of[x]
        if pid != part_of[y]:
            continue
        arc = arcs[pid]
        if arc is None:
            best_arc = min(
                ([(s + t) % m for t in range(m)] for s in range(m)),
                key=missing_required_on,
            )
            del arcs[pid]
            install([best_arc])
            pid = part_of[x]
            if required(best_arc, x, y):
                split_linear(pid, x, y)
        elif required(arc, x, y):
            split_linear(pid, x, y)

    parts = []
    for arc in arcs.values():
        if arc is None:
            arc = list(range(m))
        parts.append(tuple(verts[x] for x in arc))
    parts.sort(key=lambda part: min(part))
    result = ConsistentPartition(tuple(parts), len(missing))
    for part in result.parts:
        if len(part) > 1 and not is_prefix_copy(g, part, p):
            raise AssertionError(f"part {part} does not induce a copy of H_{len(part)}")
    return result


def is_prefix_copy(g: Graph, part, params: HamiltonPowerParams) -> bool:
    """True when ``part`` is a cyclic interval of C_n of order >= 2k+1 and
    g[part] has all the edges of H[part]. Such a graph is a copy of H_|part|."""
    n, k = params.n, params.k
    s = len(part)
    if s < 2 * k + 1:
        return False
    vs = set(part)
    if s < n:
        starts = [v for v in vs if (v - 2) % n + 1 not in vs]
        if len(starts) != 1:
            return False
    sub = induced(g, vs)
    return sub.edge_count == closed_edge_counts(n, k, s)[1]


def eta(zeta: float, k: int, b: float) -> float:
    """(2e/(k b sqrt(zeta)))^(k b sqrt(zeta)), the per-vertex growth rate of
    the count of dense connected subgraphs."""
    if not 0 < zeta < 1:
        raise ParameterError("zeta must lie in (0, 1)")
    if b <= 0 or k < 1:
        raise ParameterError("need b > 0 and k >= 1")
    x = k * b * math.sqrt(zeta)
    return math.exp(x * math.log(2 * math.e / x))


def default_zeta(ln_n: float) -> float:
    return math.log(ln_n) / ln_n


@dataclass(frozen=True)
class ZetaSchedule:
    kind: str = "default"  # "default" | "explicit"
    constant: float | None = None
    func: Callable[[float], float] | None = None

    @classmethod
    def parse(cls, text: str) -> ZetaSchedule:
        if text == "default":
            return cls()
        if text.startswith("const:"):
            return cls("explicit", float(text.split(":", 1)[1]))
        raise ParameterError(f"unknown zeta schedule {text!r}")

    def value_at(self, ln_n: float) -> float:
        if self.kind == "default":
            return default_zeta(ln_n)
        if self.func is not None:
            return self.func(ln_n)
        return float(self.constant)

    def __str__(self):
        return "default" if self.kind == "default" else f"const:{self.constant!r}"


def zeta_prime_of(zeta: float, gamma_of_n: float) -> float:
    """zeta' = (1 + gamma(n) - zeta) zeta, the density slack inherited by completion-dense graphs."""
    return (1 + gamma_of_n - zeta) * zeta


# ---------------------------------------------------------------------------
# brute-force oracles over vertex subsets


def induced_edge_counts(g: Graph) -> list[int]:
    """e(g[S]) for every vertex subset S, indexed by the subset's bitmask."""
    counts = [0] * (1 << g.n)
    for s in range(1, 1 << g.n):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        counts[s] = counts[rest] + (g.rows[low] & rest).bit_count()
    return counts


def gamma_bruteforce(n: int, k: int) -> dict[int, Fraction]:
    """max over vertex sets S of gamma(H[S]) grouped by |S| (defined cores only)."""
    h = build_hamilton_power(HamiltonPowerParams(n, k))
    best: dict[int, Fraction] = {}
    for size in range(3, n + 1):
        for combo in combinations(range(1, n + 1), size):
            gv = gamma(induced(h, combo))
            if gv.defined and (size not in best or gv.value > best[size]):
                best[size] = gv.value
    return best


def edge_subset_gamma_audit(n: int, k: int, s_max: int) -> dict:
    """Every edge subset F of H[S], |S| = s <= s_max, has gamma(F) <= gamma(s).

    Only vertex sets containing vertex 1 are visited (rotations cover the rest).
    """
    h = build_hamilton_power(HamiltonPowerParams(n, k))
    induced_best = gamma_bruteforce(n, k)
    checked = 0
    violations = []
    for size in range(3, s_max + 1):
        for rest in combinations(range(2, n + 1), size - 1):
            sub = induced(h, (1,) + rest)
            edges = sub.edges()
            for bits in range(1, 1 << len(edges)):
                f = Graph.from_edges(sub.n, [edges[i] for i in iter_bits(bits)])
                gv = gamma(f)
                checked += 1
                if gv.defined and gv.value > induced_best[size]:
                    violations.append({"vertices": (1,) + rest, "edges": bits, "gamma": str(gv)})
    return {"checked": checked, "violations": violations}
