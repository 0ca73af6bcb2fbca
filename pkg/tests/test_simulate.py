from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import edge_set, naive_power_edges
from hampow.graph_core import Graph, HamiltonPowerParams, ParameterError, build_hamilton_power
from hampow.simulate import (
    RandomGraphSpec,
    SweepConfig,
    bruteforce_contains_power,
    couple_subsample,
    find_spanning_power,
    plant,
    run_trial,
    sample,
    splitmix64,
    sweep,
    trial_seed,
    verify_witness,
)


def test_random_graph_parameters_validated():
    with pytest.raises(ParameterError):
        RandomGraphSpec(10, "gnp", 1.5)
    with pytest.raises(ParameterError):
        RandomGraphSpec(10, "gnm", 46)
    with pytest.raises(ParameterError):
        RandomGraphSpec(10, "gnm", 2.5)
    with pytest.raises(ParameterError):
        RandomGraphSpec(10, "bernoulli", 0.5)


def test_sample_extremes_and_exact_m():
    assert sample(RandomGraphSpec(12, "gnp", 1.0, 1)).rows == Graph.complete_graph(12).rows
    assert sample(RandomGraphSpec(12, "gnp", 0.0, 1)).edge_count == 0
    for seed in range(50):
        assert sample(RandomGraphSpec(15, "gnm", 37, seed)).edge_count == 37


def test_sample_is_deterministic():
    a = sample(RandomGraphSpec(30, "gnp", 0.3, 99))
    b = sample(RandomGraphSpec(30, "gnp", 0.3, 99))
    c = sample(RandomGraphSpec(30, "gnp", 0.3, 100))
    assert a == b and a != c


def test_gnp_mean_edge_count():
    n, p, trials = 100, 0.5, 10_000
    N = n * (n - 1) // 2
    counts = np.array([sample(RandomGraphSpec(n, "gnp", p, s)).edge_count for s in range(trials)])
    sigma = math.sqrt(N * p * (1 - p) / trials)
    assert abs(counts.mean() - N * p) <= 3 * sigma


def test_couple_subsample_basic():
    g = sample(RandomGraphSpec(10, "gnp", 0.5, 4))
    m = g.edge_count
    sub = couple_subsample(g, m - 5, 1)
    assert sub.edge_count == m - 5 and sub.is_subgraph_of(g)
    assert couple_subsample(g, m, 2) == g
    sup = couple_subsample(g, m + 5, 3)
    assert sup.edge_count == m + 5 and g.is_subgraph_of(sup)
    with pytest.raises(ParameterError):
        couple_subsample(g, 46, 0)


def test_couple_subsample_is_uniform():
    n, M, p, trials = 8, 10, 0.6, 100_000
    N = n * (n - 1) // 2
    iu = np.triu_indices(n, 1)
    freq = np.zeros(N)
    for t in range(trials):
        rng = np.random.default_rng(t)
        g = couple_subsample(sample(RandomGraphSpec(n, "gnp", p, t), rng), M, rng)
        assert g.edge_count == M
        rows = g.rows
        freq += np.array([(rows[u] >> v) & 1 for u, v in zip(*iu)])
    q = M / N
    sigma = math.sqrt(q * (1 - q) / trials)
    assert np.all(np.abs(freq / trials - q) <= 3.5 * sigma)


def test_search_trivial_cases():
    out = find_spanning_power(Graph.complete_graph(10), 4)
    assert out.status == "found" and verify_witness(Graph.complete_graph(10), 4, out.witness)
    params = HamiltonPowerParams(12, 4)
    h = build_hamilton_power(params)
    assert find_spanning_power(h, 4).status == "found"
    rows = list(h.rows)
    rows[0] &= ~(1 << 4)
    rows[4] &= ~1
    assert find_spanning_power(Graph.from_rows(rows), 4).status == "absent"
    with pytest.raises(ParameterError):
        find_spanning_power(Graph.complete_graph(2), 1)


def test_search_reports_timeout_not_absent():
    # C_14^3 is 6-regular, so the degree filter passes and the search must expand
    h = build_hamilton_power(HamiltonPowerParams(14, 3))
    out = find_spanning_power(h, 3, budget=3)
    assert out.status == "timeout"
    assert out.witness is None


def test_verify_witness_rejects_bad_orders():
    h = build_hamilton_power(HamiltonPowerParams(10, 2))
    assert verify_witness(h, 2, tuple(range(1, 11)))
    assert not verify_witness(h, 2, (1, 3, 2, 4, 5, 6, 7, 8, 9, 10))
    assert not verify_witness(h, 2, (1, 1, 2, 3, 4, 5, 6, 7, 8, 9))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_search_agrees_with_oracle(k):
    rng = np.random.default_rng(1000 + k)
    hits = 0
    for t in range(60):
        n = int(rng.integers(max(5, 2 * k + 1), 10))
        p = float(rng.uniform(0.55, 1.0))
        g = sample(RandomGraphSpec(n, "gnp", p, int(rng.integers(2**32))))
        out = find_spanning_power(g, k)
        expect = bruteforce_contains_power(g, k)
        assert (out.status == "found") == expect
        assert out.status != "timeout"
        hits += expect
    assert hits > 0


def test_plant_into_empty_base():
    spec = RandomGraphSpec(15, "gnp", 0.0, 11)
    g, witness = plant(spec, 3)
    relabel = {pos + 1: v for pos, v in enumerate(witness)}
    expected = {frozenset((relabel[u], relabel[v])) for u, v in map(tuple, naive_power_edges(15, 3))}
    assert edge_set(g) == expected
    assert find_spanning_power(g, 3).status == "found"


def test_planted_instances_are_found():
    for t in range(40):
        n = 12 + t % 13
        spec = RandomGraphSpec(n, "gnp", 0.3 * (t % 4) / 3, t)
        g, witness = plant(spec, 4)
        assert g.edge_count >= 4 * n
        assert verify_witness(g, 4, witness)
        assert find_spanning_power(g, 4).status == "found"


def test_trial_seed_is_stable_and_distinct():
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    seeds = {trial_seed(7, t, g) for t in range(50) for g in range(20)}
    assert len(seeds) == 1000
    assert trial_seed(7, 3, 4) == trial_seed(7, 3, 4)


def test_run_trial_record():
    rec = run_trial(RandomGraphSpec(10, "gnp", 1.0, 5), 4, 10**6)
    assert rec.outcome.status == "found" and rec.elapsed >= 0 and rec.k == 4


def test_sweep_rows_and_reference():
    cfg = SweepConfig(n=10, k=4, grid=(0.5, 1.0), trials=20, seed=3)
    rows = sweep(cfg)
    assert [r.grid_value for r in rows] == [0.5, 1.0]
    assert rows[1].found == 20 and rows[1].found_frequency == 1.0
    assert rows[0].found + rows[0].absent + rows[0].timeout == 20
    assert rows[0].p_star_reference == pytest.approx(0.722, abs=1e-3)


def test_sweep_independent_of_workers():
    cfg = SweepConfig(n=10, k=3, grid=(0.6, 0.7, 0.8, 0.9), trials=15, seed=42)
    serial = sweep(cfg)
    parallel = sweep(SweepConfig(**{**cfg.__dict__, "workers": 3}))
    assert serial == parallel


def test_gnm_sweep():
    rows = sweep(SweepConfig(n=9, k=2, grid=(20, 36), trials=10, seed=1, model="gnm"))
    assert rows[1].found == 10
