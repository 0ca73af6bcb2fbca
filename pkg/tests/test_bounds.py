from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hsubgraph
from hampow.bounds import (
    IGNORED_FACTORS,
    BoundInputs,
    assemble,
    assemble_grid,
    binomial_tail,
    chernoff_exponent,
    chernoff_tail,
    dense_bases,
    first_moment_log,
    first_moment_log_at,
    log_factorial,
    nu_log,
    p_log_of,
    partial_sum_closed,
    second_moment_conditions,
    sparse_T_doubleprime,
    sparse_weight,
    sparse_weight_exponents,
    stirling_log_factorial,
    T_sparse_and_dense,
)
from hampow.density import ZetaSchedule
from hampow.graph_core import HamiltonPowerParams, disjoint_union


def direct(ln_n, k=4, eps=0.1, zeta=None, a=64.0):
    """Plain float evaluation of the series ratios, usable while n is representable."""
    n = math.exp(ln_n)
    p = (1 + eps) * (math.e / n) ** (1 / k)
    zeta = math.log(ln_n) / ln_n if zeta is None else zeta
    gn = k + 2 * k / (n - 2)
    nu = (1 + n**-0.5) * math.exp(7 * (2 * k) ** 2 / (2 * math.sqrt(n) * p))
    x = 3 * nu * math.e * k * k / (p ** (gn - zeta) * n)
    zp = (1 + gn - zeta) * zeta
    r = math.sqrt(zp)
    B_d = math.e * nu * a**r / ((1 - a * r) * n)
    B_s = 3 * nu * k * math.e / n
    y = k * B_d / p ** (gn - zeta)
    z = B_d / p**gn
    return {"n": n, "p": p, "nu": nu, "x": x, "B_d": B_d, "B_s": B_s, "y": y, "z": z, "gn": gn}


def close10(a, b):
    return a == pytest.approx(b, rel=1e-10, abs=1e-300)


def test_first_moment_worked_values():
    p_star_log = (1 - math.log(10)) / 4
    value = first_moment_log(10, 4, p_star_log)
    assert abs(value - (-0.917)) < 1e-3
    direct_value = math.log(math.factorial(10) / 20 * (math.e / 10) ** 10)
    assert close10(value, direct_value)
    shifted = first_moment_log(10, 4, p_star_log + math.log(0.9))
    assert shifted - value == pytest.approx(40 * math.log(0.9), abs=1e-12)
    assert first_moment_log(12, 3, 0.0) > 0
    with pytest.raises(ValueError):
        first_moment_log(9, 4, 0.0)


@pytest.mark.parametrize("ln_n", [5.0, 10.0, 30.0, 100.0, 300.0, 690.0])
@pytest.mark.parametrize("eps", [0.05, 0.1, -0.1, 0.5])
def test_first_moment_large_n_matches_direct(ln_n, eps):
    n = math.exp(ln_n)
    p_log = math.log1p(eps) + (1 - ln_n) / 4
    d = math.lgamma(n + 1) - math.log(2 * n) + 4 * n * p_log
    got = first_moment_log_at(ln_n, 4, eps)
    # the direct form loses ~ln n * ulp(n ln n) to cancellation
    assert got == pytest.approx(d, rel=1e-10, abs=1e-14 * n * ln_n)


def test_stirling_residual():
    for n in (10, 100, 10**4):
        r, err = stirling_log_factorial(math.log(n))
        assert abs(log_factorial(n) - (n * math.log(n) - n) - r) <= err + 1e-9


def test_p_log_formula():
    for ln_n in (3.0, 50.0, 200.0):
        n = math.exp(ln_n)
        assert close10(math.exp(p_log_of(ln_n, 4, 0.1)), 1.1 * (math.e / n) ** 0.25)


@pytest.mark.parametrize("ln_n", [2.0, 9.0, 13.815510557964274, 50.0, 230.0, 690.0])
def test_nu_matches_direct(ln_n):
    d = direct(ln_n)
    assert close10(math.exp(nu_log(ln_n, 4, p_log_of(ln_n, 4, 0.1))), d["nu"])


@pytest.mark.parametrize("ln_n", [100.0, 150.0, 200.0, 230.0])
@pytest.mark.parametrize("zeta", [None, 1e-4])
def test_series_ratios_match_direct(ln_n, zeta):
    sched = ZetaSchedule() if zeta is None else ZetaSchedule("explicit", zeta)
    inputs = BoundInputs(ln_n, 4, 0.1, sched, 64.0)
    d = direct(ln_n, zeta=zeta)
    assert close10(sparse_T_doubleprime(inputs).x, d["x"])
    zp = inputs.zeta_prime
    if 64 * math.sqrt(zp) < 1:
        b = dense_bases(inputs)
        assert close10(math.exp(b.B_d_log), d["B_d"])
        assert close10(math.exp(b.B_s_log), d["B_s"])
        t = T_sparse_and_dense(inputs)
        assert close10(math.exp(t.y_log), d["y"])
        assert close10(math.exp(t.z_log), d["z"])


def test_conditions_at_one_million():
    ln_n = math.log(1e6)
    conds = {c.name: c for c in second_moment_conditions(BoundInputs(ln_n, 4, 0.1))}
    assert len(conds) == 5
    n = 1e6
    p = 1.1 * (math.e / n) ** 0.25
    alpha = 8 / (n - 1)
    N = n * (n - 1) / 2
    assert math.exp(conds["one_minus_p_sqrt_n_grows"].log_value) == pytest.approx((1 - p) * math.sqrt(n), rel=1e-10)
    assert (1 - p) * math.sqrt(n) == pytest.approx(955.3, rel=1e-3)
    assert math.exp(conds["alpha3_N_over_p2_vanishes"].log_value) == pytest.approx(alpha**3 * N / p**2, rel=1e-10)
    assert alpha**3 * N / p**2 == pytest.approx(0.1283, rel=1e-3)
    assert math.exp(conds["pN_grows"].log_value) == pytest.approx(p * N, rel=1e-10)
    assert math.exp(conds["n_p2_over_Delta4_grows"].log_value) == pytest.approx(n * p * p / 8**4, rel=1e-10)
    assert conds["alpha_N_at_least_n"].holds and conds["alpha3_N_over_p2_vanishes"].holds
    # n p^2 / Delta^4 is still below 1 at this n
    assert not conds["n_p2_over_Delta4_grows"].holds


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 20), st.fractions(Fraction(1, 1000), Fraction(999, 1000)), st.integers(0, 30),
       st.fractions(Fraction(1, 100), Fraction(100)))
def test_partial_sum_closed_matches_exact_sum(e, p, r, base):
    exact = sum(math.comb(e, j) * (1 / p - 1) ** j for j in range(e + 1)) * base**r
    got = partial_sum_closed(e, r, math.log(p), math.log(base))
    assert got == pytest.approx(math.log(exact), rel=1e-12, abs=1e-12)


def test_partial_sum_examples():
    assert math.exp(partial_sum_closed(2, 0, math.log(0.5), 0.0)) == pytest.approx(4)
    assert partial_sum_closed(0, 0, math.log(0.3), 0.0) == 0


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**31))
def test_sparse_weight_multiplies_over_disjoint_unions(seed):
    rng = random.Random(seed)
    k1, k2 = rng.randint(1, 3), rng.randint(1, 3)
    p1 = HamiltonPowerParams(rng.randint(2 * k1 + 2, 14), k1)
    p2 = HamiltonPowerParams(rng.randint(2 * k2 + 2, 14), k2)
    g1 = random_hsubgraph(rng, p1, rng.uniform(0.1, 0.9)).graph()
    g2 = random_hsubgraph(rng, p2, rng.uniform(0.1, 0.9)).graph()
    q = Fraction(rng.randint(1, 50), rng.randint(1, 50))
    b = Fraction(rng.randint(1, 50), rng.randint(1, 50))
    g = disjoint_union(g1, g2)
    assert sparse_weight(g, q, b) == sparse_weight(g1, q, b) * sparse_weight(g2, q, b)
    u1, r1 = sparse_weight_exponents(g1)
    u2, r2 = sparse_weight_exponents(g2)
    assert sparse_weight_exponents(g) == (u1 + u2, r1 + r2)


def test_chernoff_worked_instance():
    bound = chernoff_tail(10, 0.2, 8)
    exact = binomial_tail(10, Fraction(1, 5), 8)
    assert bound == pytest.approx(0.0455, abs=5e-5)
    assert float(exact) == pytest.approx(7.79e-5, rel=1e-3)
    assert exact <= bound
    assert chernoff_tail(10, 0.2, 2) == 1.0
    assert chernoff_exponent(10, 0.2, 8) < 0
    with pytest.raises(ValueError):
        chernoff_tail(10, 1.0, 3)


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 30), st.fractions(Fraction(1, 100), Fraction(99, 100)), st.integers(1, 30))
def test_chernoff_dominates_exact_tail(m, p, t):
    assert chernoff_tail(m, float(p), t) >= float(binomial_tail(m, p, t)) * (1 - 1e-12)


def test_pipeline_values():
    sched = ZetaSchedule()
    r6 = assemble(BoundInputs(math.log(1e6), 4, 0.1, sched, 64.0))
    assert r6.x_sparse > 1 and math.isinf(r6.T_doubleprime) and r6.vacuous
    assert any("diverges" in f for f in r6.flags)
    r7 = assemble(BoundInputs(1e7, 4, 0.1, sched, 64.0))
    assert r7.x_sparse == pytest.approx(0.583, abs=1e-3) and math.isfinite(r7.T_doubleprime)
    r20 = assemble(BoundInputs(1e20, 4, 0.1, sched, 64.0))
    assert r20.T_doubleprime < 0.05
    assert math.isfinite(r20.T_s) and math.isfinite(r20.T_d)
    assert r20.f_minus_one_bound < 0.2
    assert r20.T == r20.T_s + r20.T_d
    assert set(r20.ignored_asymptotic_factors) == set(IGNORED_FACTORS)
    assert r20.prob_no_copy_bound == r20.f_minus_one_bound


def test_dense_bases_ratio_and_limits():
    inputs = BoundInputs(1e7, 4, 0.1, ZetaSchedule(), 64.0)
    b = dense_bases(inputs)
    assert b.B_d_log < b.B_s_log
    root = math.sqrt(b.zeta_prime)
    expected = math.log(12 * (1 - 64 * root) / 64**root)
    assert b.ratio_log == pytest.approx(expected, rel=1e-12)
    assert b.B_s_log - b.B_d_log == pytest.approx(expected, abs=1e-7)
    tiny = BoundInputs(1e7, 4, 0.1, ZetaSchedule("explicit", 1e-30), 64.0)
    assert dense_bases(tiny).B_d_log == pytest.approx(1 + nu_log(1e7, 4, tiny.p_log) - 1e7, rel=1e-12)


def test_epsilon_zero_closes_nothing():
    t = T_sparse_and_dense(BoundInputs(1e20, 4, 0.0, ZetaSchedule(), 64.0))
    assert t.z_log > 0 and math.isinf(t.T_d)


def test_grid_monotone():
    grid = [10.0**e for e in range(16, 23)]
    reports = assemble_grid(grid, 4, 0.1, ZetaSchedule(), 64.0)
    for key in ("T_doubleprime", "T_s", "T_d"):
        vals = [getattr(r, key) for r in reports]
        assert all(b <= a for a, b in zip(vals, vals[1:])), key


def test_nu_decreasing_on_grid():
    vals = [nu_log(x, 4, p_log_of(x, 4, 0.1)) for x in (5.0, 8.0, 12.0, 20.0, 40.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert math.exp(vals[0]) > 1


@pytest.mark.parametrize("ln_n", [1e8, 1e12, 1e20])
def test_monotone_in_epsilon(ln_n):
    eps_grid = [0.05, 0.1, 0.2, 0.4]
    reports = [assemble(BoundInputs(ln_n, 4, e, ZetaSchedule(), 64.0)) for e in eps_grid]
    for key in ("T_doubleprime", "T_s", "T_d", "f_minus_one_bound"):
        vals = [getattr(r, key) for r in reports]
        assert all(b <= a for a, b in zip(vals, vals[1:])), key
