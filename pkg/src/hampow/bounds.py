"""Finite-n evaluation of the second-moment bound chain for C_n^k in G(n, M).

Every quantity is a function of ln n rather than n, so that the regime
where the o(1) terms actually become small (ln n around 1e16..1e22) can be
evaluated. Terms of the form p^-(k+c) / n are never formed as a difference of
two huge logarithms; they are expanded first:

    ln(p^-(k+c) / n) = -(k+c) ln(1+eps) - 1 - c (1 - ln n) / k

for p = (1+eps) (e/n)^(1/k).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

from .density import ZetaSchedule, threshold_orders_closed, zeta_prime_of
from .graph_core import Graph, decompose

DEFAULT_A = 64.0
DEFAULT_EPS = 0.1

IGNORED_FACTORS = {
    "second_moment_prefactor": "f <= (1+o(1)) exp(-(1-p) alpha^2 N / p) S_H",
    "isolated_edge_prefactor": "S_H <= (1+o(1)) exp((1-p) alpha^2 N / p) S'_H",
    "dense_completion_prefactor": "S_ds + S_dd <= (1+o(1)) S_bar_d",
    "dense_subgraph_count_eta": "eta^s growth of the dense connected subgraph count inside T_d",
}


class UndefinedBaseError(ValueError):
    """a * sqrt(zeta') >= 1, so the dense base B_d is not defined."""


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def stirling_log_factorial(ln_n: float) -> tuple[float, float]:
    """ln(n!) - (n ln n - n) for n = e^ln_n, with an absolute error bound.

    Uses 0.5 ln(2 pi n) + 1/(12 n); the remainder is at most 1/(360 n^3).
    """
    inv_n = math.exp(-ln_n) if ln_n < 745 else 0.0
    return 0.5 * (math.log(2 * math.pi) + ln_n) + inv_n / 12, inv_n**3 / 360


def first_moment_log(n: int, k: int, p_log: float) -> float:
    """ln E[X] = ln(n!) - ln(2n) + kn ln p for copies of C_n^k in G(n, p).

    Uses n!/(2n) copies, which is exact when aut(C_n^k) = 2n (n >= 2k+3).
    """
    if n < 2 * k + 2:
        raise ValueError(f"first moment needs n >= 2k+2 (n={n}, k={k})")
    return log_factorial(n) - math.log(2 * n) + k * n * p_log


def first_moment_log_at(ln_n: float, k: int, eps: float) -> float:
    """ln E[X] at p = (1+eps) p*, for astronomically large n given by ln n.

    ``eps`` may be negative; the report evaluates the first moment at
    (1-eps) p*, below the threshold.

    ln(n!) - n ln n + n is taken from Stirling, which cancels against
    kn ln p* = n - n ln n; the result is kn ln(1+eps) + O(ln n). It overflows
    to +-inf once n itself is not representable.
    """
    residual, _ = stirling_log_factorial(ln_n)
    try:
        n = math.exp(ln_n)
    except OverflowError:
        n = math.inf
    lead = k * math.log1p(eps)
    bulk = lead * n if lead != 0 else 0.0
    return bulk + residual - math.log(2) - ln_n


def p_log_of(ln_n: float, k: int, eps: float) -> float:
    return math.log1p(eps) + (1 - ln_n) / k


def chernoff_exponent(m: int, p: float, t: float) -> float:
    """-t (ln(t / (m p)) - 1), the log of the unclamped tail bound."""
    if m < 1 or not 0 < p < 1 or t <= 0:
        raise ValueError("need m >= 1, 0 < p < 1, t > 0")
    return -t * (math.log(t / (m * p)) - 1)


def chernoff_tail(m: int, p: float, t: float) -> float:
    """Upper bound on P(Bin(m, p) >= t), clamped at 1."""
    return min(1.0, math.exp(min(0.0, chernoff_exponent(m, p, t))))


def binomial_tail(m: int, p, t) -> float:
    """Exact P(Bin(m, p) >= t) by summation; ``p`` may be a Fraction."""
    start = max(0, math.ceil(t))
    return sum(math.comb(m, j) * p**j * (1 - p) ** (m - j) for j in range(start, m + 1))


def partial_sum_closed(e_F: int, r_F: int, p_log: float, base_log: float) -> float:
    """ln(p^-e base^r) = ln sum_{F' subset F} (1/p - 1)^e(F') base^r(F)."""
    return -e_F * p_log + r_F * base_log


def sparse_weight_exponents(g: Graph) -> tuple[int, int]:
    """(r(F) - c(F°), r(F)): the powers of p^-(gamma(n)-zeta) and 3 nu k e / n
    in the weight of a sparse F. Both are additive over disjoint unions."""
    d = decompose(g)
    return d.rank - d.core_components, d.rank


def sparse_weight(g: Graph, q, b) -> Fraction:
    """Exact q^(r - c(F°)) b^r for rational q, b."""
    u, r = sparse_weight_exponents(g)
    return Fraction(q) ** u * Fraction(b) ** r


def nu_log(ln_n: float, k: int, p_log: float) -> float:
    """ln nu for nu = (1 + n^-1/2) exp(7 Delta^2 / (2 sqrt(n) p)), Delta = 2k."""
    half = -ln_n / 2
    return math.log1p(math.exp(half)) + 14 * k * k * math.exp(half - p_log)


def _expit_log(x_log: float) -> float:
    """ln(x / (1 - x)) for x = e^x_log < 1."""
    return x_log - math.log1p(-math.exp(x_log))


@dataclass(frozen=True)
class BoundInputs:
    ln_n: float
    k: int
    eps: float = DEFAULT_EPS
    zeta: ZetaSchedule = field(default_factory=ZetaSchedule)
    a: float = DEFAULT_A

    @property
    def p_log(self) -> float:
        return p_log_of(self.ln_n, self.k, self.eps)

    @property
    def zeta_value(self) -> float:
        return self.zeta.value_at(self.ln_n)

    @property
    def delta(self) -> float:
        """gamma(n) - k = 2k/(n-2)."""
        if self.ln_n > 700:
            return 2 * self.k * math.exp(-self.ln_n)
        return 2 * self.k / (math.exp(self.ln_n) - 2)

    @property
    def gamma_n(self) -> float:
        return self.k + self.delta

    @property
    def zeta_prime(self) -> float:
        return zeta_prime_of(self.zeta_value, self.gamma_n)

    def neg_power_over_n_log(self, c: float) -> float:
        """ln(p^-(k+c) / n) without cancellation."""
        return -(self.k + c) * math.log1p(self.eps) - 1 - c * (1 - self.ln_n) / self.k


@dataclass(frozen=True)
class Condition:
    name: str
    log_value: float
    holds: bool


def second_moment_conditions(inputs: BoundInputs) -> list[Condition]:
    """The five hypotheses of the general second-moment bound at finite n.

    Growth conditions (omega(1)) are flagged as holding when the quantity
    exceeds 1 and decay conditions (o(1)) when it is below 1; the trend
    over a grid of n is what actually matters.
    """
    L, k, pl = inputs.ln_n, inputs.k, inputs.p_log
    inv_n = math.exp(-L)
    ln_n_minus_1 = L + math.log1p(-inv_n)
    ln_N = L + ln_n_minus_1 - math.log(2)
    p = math.exp(pl)
    one_minus_p = math.log1p(-p) if p < 1 else -math.inf
    values = [
        ("alpha_N_at_least_n", math.log(k), True),
        ("pN_grows", pl + ln_N, None),
        ("one_minus_p_sqrt_n_grows", one_minus_p + L / 2, None),
        ("n_p2_over_Delta4_grows", L + 2 * pl - 4 * math.log(2 * k), None),
        ("alpha3_N_over_p2_vanishes", math.log(4 * k**3) + L - 2 * ln_n_minus_1 - 2 * pl, None),
    ]
    out = []
    for name, v, fixed in values:
        holds = fixed if fixed is not None else (v < 0 if name.endswith("vanishes") else v > 0)
        out.append(Condition(name, v, holds))
    return out


@dataclass(frozen=True)
class SparseSeries:
    x_log: float
    x: float
    value: float
    diverges: bool


def sparse_T_doubleprime(inputs: BoundInputs) -> SparseSeries:
    """3 nu e k^2 sum_{s>=3} x^(s-2) with x = 3 nu e k^2 / (p^(gamma(n)-zeta) n)."""
    k = inputs.k
    nl = nu_log(inputs.ln_n, k, inputs.p_log)
    pref = math.log(3) + nl + 1 + 2 * math.log(k)
    x_log = pref + inputs.neg_power_over_n_log(inputs.delta - inputs.zeta_value)
    x = math.exp(min(x_log, 700.0))
    if x_log >= 0:
        return SparseSeries(x_log, x, math.inf, True)
    return SparseSeries(x_log, x, math.exp(pref + _expit_log(x_log)), False)


@dataclass(frozen=True)
class DenseBases:
    B_s_log: float
    B_d_log: float
    ratio_log: float
    zeta_prime: float
    d_scale_log: float  # ln(n B_d)


def dense_bases(inputs: BoundInputs) -> DenseBases:
    """B_s = 3 nu k e / n and B_d = e nu a^sqrt(z') / ((1 - a sqrt(z')) n)."""
    zp = inputs.zeta_prime
    root = math.sqrt(zp)
    if inputs.a * root >= 1:
        raise UndefinedBaseError(f"a*sqrt(zeta')={inputs.a * root:.6g} >= 1; B_d undefined")
    nl = nu_log(inputs.ln_n, inputs.k, inputs.p_log)
    d_scale = 1 + nl + root * math.log(inputs.a) - math.log1p(-inputs.a * root)
    s_scale = math.log(3 * inputs.k) + nl + 1
    ratio = math.log(3 * inputs.k) + math.log1p(-inputs.a * root) - root * math.log(inputs.a)
    return DenseBases(s_scale - inputs.ln_n, d_scale - inputs.ln_n, ratio, zp, d_scale)


@dataclass(frozen=True)
class DenseSeries:
    T_s: float
    T_d: float
    y_log: float  # ratio of the T_s series
    z_log: float  # ratio of the T_d series
    L_order: float
    flags: tuple[str, ...]

    @property
    def T(self) -> float:
        return self.T_s + self.T_d


def T_sparse_and_dense(inputs: BoundInputs) -> DenseSeries:
    """T_s = n k B_d sum_{s>=3} y^(s-2), y = k B_d / p^(gamma(n)-zeta);
    T_d = n B_d sum_{s>=L} z^(s-2), z = B_d / p^gamma(n)."""
    bases = dense_bases(inputs)
    k = inputs.k
    flags = []
    y_log = math.log(k) + bases.d_scale_log + inputs.neg_power_over_n_log(inputs.delta - inputs.zeta_value)
    if y_log >= 0:
        T_s = math.inf
        flags.append("T_s diverges (ratio >= 1)")
    else:
        T_s = math.exp(math.log(k) + bases.d_scale_log + _expit_log(y_log))
    z_log = bases.d_scale_log + inputs.neg_power_over_n_log(inputs.delta)
    L_order, _ = threshold_orders_closed(k, bases.zeta_prime, inputs.delta)
    if z_log >= 0:
        T_d = math.inf
        flags.append("T_d diverges (ratio >= 1)")
    elif math.isinf(L_order):
        T_d = 0.0
    else:
        log_T_d = bases.d_scale_log + (L_order - 2) * z_log - math.log1p(-math.exp(z_log))
        T_d = math.exp(log_T_d) if log_T_d < 700 else math.inf
    return DenseSeries(T_s, T_d, y_log, z_log, L_order, tuple(flags))


@dataclass(frozen=True)
class BoundReport:
    ln_n: float
    k: int
    eps: float
    a: float
    zeta: float
    zeta_prime: float
    p_log: float
    ln_first_moment: float
    nu: float
    alpha_log: float
    conditions: tuple[Condition, ...]
    x_sparse: float
    T_doubleprime: float
    B_s_log: float
    B_d_log: float
    T_s: float
    T_d: float
    T: float
    L_order: float
    f_minus_one_bound: float
    flags: tuple[str, ...]
    ignored_asymptotic_factors: tuple[str, ...] = tuple(IGNORED_FACTORS)

    @property
    def vacuous(self) -> bool:
        return math.isinf(self.f_minus_one_bound)

    @property
    def prob_no_copy_bound(self) -> float:
        """P(X = 0) <= Var X / mu^2 = f - 1."""
        return self.f_minus_one_bound


def assemble(inputs: BoundInputs) -> BoundReport:
    """Chain the sparse and dense series into the bound on f - 1.

    f - 1 <= (exp(T'') - 1) + (exp(T) - 1) with every unquantified (1+o(1))
    factor set to 1 (listed in ``ignored_asymptotic_factors``).
    """
    k, L = inputs.k, inputs.ln_n
    flags = []
    sparse = sparse_T_doubleprime(inputs)
    if sparse.diverges:
        flags.append("T'' diverges (x_sparse >= 1)")
    try:
        bases = dense_bases(inputs)
        dense = T_sparse_and_dense(inputs)
        flags.extend(dense.flags)
        B_s_log, B_d_log = bases.B_s_log, bases.B_d_log
        T_s, T_d, L_order = dense.T_s, dense.T_d, dense.L_order
    except UndefinedBaseError as exc:
        flags.append(str(exc))
        B_s_log = math.log(3 * k) + nu_log(L, k, inputs.p_log) + 1 - L
        B_d_log = math.nan
        T_s = T_d = L_order = math.inf
    T = T_s + T_d
    if sparse.value > 700 or T > 700:
        f_minus_one = math.inf
    else:
        f_minus_one = math.expm1(sparse.value) + math.expm1(T)
    if math.isinf(f_minus_one):
        flags.append("bound vacuous at this n")
    alpha_log = math.log(2 * k) - (L + math.log1p(-math.exp(-L)))
    nl = nu_log(L, k, inputs.p_log)
    return BoundReport(
        ln_n=L,
        k=k,
        eps=inputs.eps,
        a=inputs.a,
        zeta=inputs.zeta_value,
        zeta_prime=inputs.zeta_prime,
        p_log=inputs.p_log,
        ln_first_moment=first_moment_log_at(L, k, -inputs.eps),
        nu=math.exp(nl) if nl < 700 else math.inf,
        alpha_log=alpha_log,
        conditions=tuple(second_moment_conditions(inputs)),
        x_sparse=sparse.x,
        T_doubleprime=sparse.value,
        B_s_log=B_s_log,
        B_d_log=B_d_log,
        T_s=T_s,
        T_d=T_d,
        T=T,
        L_order=L_order,
        f_minus_one_bound=f_minus_one,
        flags=tuple(flags),
    )


def assemble_grid(ln_n_grid, k: int, eps: float = DEFAULT_EPS, zeta: ZetaSchedule | None = None,
                  a: float = DEFAULT_A) -> list[BoundReport]:
    zeta = zeta or ZetaSchedule()
    return [assemble(BoundInputs(float(x), k, eps, zeta, a)) for x in ln_n_grid]
