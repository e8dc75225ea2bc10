import math

import numpy as np
import pytest

import tierroute as tr

from conftest import make_record, make_set


LAM = 0.01


def default_costs():
    return tr.CostParams(lambda_unit=LAM)


def oracle_reward(mu, sigma, conf, alpha, beta, p):
    """Independent case split + arithmetic for one sample's reward."""
    if mu >= alpha and sigma <= beta:
        return conf["mobile"] - p.lambda_m * p.m
    if mu >= alpha and sigma > beta:
        return conf["edge"] - p.lambda_e * p.n - p.o_e
    return conf["cloud"] - p.o_c - p.gamma


def oracle_tune(samples, alphas, betas, p):
    """Exhaustive search with fsum means and smallest-(alpha, beta) ties."""
    best, best_r, table = None, -math.inf, []
    for a in alphas:
        for b in betas:
            r = math.fsum(oracle_reward(mu, s, c, a, b, p) for mu, s, c in samples) / len(samples)
            table.append((a, b, r))
            if r > best_r:
                best_r, best = r, (a, b)
    return best, table


def validation_samples(ts, stats):
    return [(stats.mu(r.id), stats.sigma(r.id), r.tier_conf)
            for r in ts.split("validation")]


# --- parameters -------------------------------------------------------------

def test_default_cost_multiples():
    p = default_costs()
    assert p.lambda_m == pytest.approx(1.5 * LAM)
    assert p.lambda_e == pytest.approx(1.0 * LAM)
    assert p.o_e == pytest.approx(2.5 * LAM)
    assert p.o_c == pytest.approx(3.0 * LAM)
    assert p.gamma == pytest.approx(6.0 * LAM)
    assert (p.m, p.n, p.l) == (4, 6, 12)


def test_large_scale_layer_split():
    p = tr.CostParams.large_scale()
    assert (p.m, p.n, p.l) == (6, 12, 24)


def test_tier_costs_strictly_increase_at_defaults():
    c = tr.tier_costs(default_costs())
    assert c.mobile == pytest.approx(0.06)
    assert c.edge == pytest.approx(0.085)
    assert c.cloud == pytest.approx(0.09)
    assert c.mobile < c.edge < c.cloud


def test_layer_constraint_enforced():
    with pytest.raises(tr.CostError, match="1 <= m <= n <= l"):
        tr.CostParams(m=6, n=4, l=12)
    with pytest.raises(tr.CostError, match="1 <= m <= n <= l"):
        tr.CostParams(m=0, n=4, l=12)
    tr.CostParams(m=4, n=4, l=4)  # degenerate but legal: single device


def test_cost_validation():
    with pytest.raises(tr.CostError, match="lambda_unit"):
        tr.CostParams(lambda_unit=0.0)
    with pytest.raises(tr.CostError, match="gamma"):
        tr.CostParams(gamma=-1.0)


def test_default_grid_values():
    g = tr.ThresholdGrid()
    assert g.alphas == (0.55, 0.6, 0.65, 0.7, 0.8)
    assert g.betas == (0.05, 0.08, 0.11, 0.14, 0.17)
    assert len(g.pairs()) == 25


def test_grid_validation():
    with pytest.raises(tr.CostError, match="strictly increasing"):
        tr.ThresholdGrid(alphas=(0.6, 0.6), betas=(0.05,))
    with pytest.raises(tr.CostError, match="non-empty"):
        tr.ThresholdGrid(alphas=(), betas=(0.05,))
    with pytest.raises(tr.CostError, match="out-of-range"):
        tr.ThresholdGrid(alphas=(0.5, 1.5), betas=(0.05,))


# --- reward -----------------------------------------------------------------

def test_reward_easy_case():
    p = default_costs()
    conf = {"mobile": 0.95, "edge": 0.9, "cloud": 0.99}
    assert tr.reward(0.9, 0.02, conf, 0.7, 0.1, p) == pytest.approx(0.89, abs=1e-12)


def test_reward_medium_case():
    p = default_costs()
    conf = {"mobile": 0.7, "edge": 0.90, "cloud": 0.99}
    assert tr.reward(0.9, 0.2, conf, 0.7, 0.1, p) == pytest.approx(0.815, abs=1e-12)


def test_reward_hard_case():
    p = default_costs()
    conf = {"mobile": 0.4, "edge": 0.6, "cloud": 0.97}
    assert tr.reward(0.3, 0.01, conf, 0.7, 0.1, p) == pytest.approx(0.88, abs=1e-12)


def test_reward_missing_confidence_errors():
    with pytest.raises(tr.CostError, match="missing tier confidence"):
        tr.reward(0.9, 0.02, {"mobile": 0.9, "edge": 0.9}, 0.7, 0.1, default_costs())


def test_reward_matches_oracle_randomly():
    rng = np.random.default_rng(0)
    p = default_costs()
    for _ in range(500):
        mu, sigma = float(rng.uniform()), float(rng.uniform(0, 0.25))
        alpha, beta = float(rng.uniform()), float(rng.uniform(0, 0.25))
        conf = {t: float(rng.uniform()) for t in tr.TIERS}
        assert tr.reward(mu, sigma, conf, alpha, beta, p) == pytest.approx(
            oracle_reward(mu, sigma, conf, alpha, beta, p), abs=1e-15)


# --- expected reward and tuning --------------------------------------------

def test_expected_reward_single_sample():
    ts = make_set([make_record("v0", split="validation", probs=[0.9, 0.9, 0.9],
                               conf={"mobile": 0.8, "edge": 0.9, "cloud": 0.95})])
    stats = tr.compute_stats(ts)
    p = default_costs()
    got = tr.expected_reward(ts, stats, 0.7, 0.1, p)
    assert got == pytest.approx(tr.reward(0.9, 0.0, ts.records[0].tier_conf, 0.7, 0.1, p))


def test_expected_reward_all_hard_mean():
    recs = [make_record(f"v{i}", split="validation", probs=[0.5, 0.6, 0.55],
                        conf={"mobile": 0.4, "edge": 0.5, "cloud": 0.9 + i / 100})
            for i in range(5)]
    ts = make_set(recs)
    stats = tr.compute_stats(ts)
    p = default_costs()
    got = tr.expected_reward(ts, stats, 0.8, 0.05, p)  # all mu < 0.8 -> hard
    want = math.fsum((0.9 + i / 100) - p.o_c - p.gamma for i in range(5)) / 5
    assert got == pytest.approx(want, abs=1e-12)


def test_expected_reward_matches_bruteforce(bench_traces, bench_costs):
    sub = tr.TraceSet(D=bench_traces.D, E=bench_traces.E,
                      num_classes=bench_traces.num_classes, seed=None, note="",
                      records=bench_traces.split("validation")[:200])
    stats = tr.compute_stats(sub)
    samples = validation_samples(sub, stats)
    for alpha, beta in ((0.55, 0.05), (0.65, 0.11), (0.8, 0.17)):
        want = math.fsum(oracle_reward(mu, s, c, alpha, beta, bench_costs)
                         for mu, s, c in samples) / len(samples)
        assert tr.expected_reward(sub, stats, alpha, beta, bench_costs) == pytest.approx(
            want, abs=1e-12)


def test_tune_single_pair_grid(bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    grid = tr.ThresholdGrid(alphas=(0.6,), betas=(0.1,))
    alpha, beta, table = tr.tune_thresholds(bench_traces, stats, grid, bench_costs)
    assert (alpha, beta) == (0.6, 0.1)
    assert len(table) == 1


def test_tune_matches_oracle(bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    grid = tr.ThresholdGrid()
    alpha, beta, table = tr.tune_thresholds(bench_traces, stats, grid, bench_costs)
    samples = validation_samples(bench_traces, stats)
    (oa, ob), otable = oracle_tune(samples, grid.alphas, grid.betas, bench_costs)
    assert (alpha, beta) == (oa, ob)
    assert len(table) == len(otable) == 25
    for (a1, b1, r1), (a2, b2, r2) in zip(table, otable):
        assert (a1, b1) == (a2, b2)
        assert abs(r1 - r2) < 1e-12
    chosen = {(a, b): r for a, b, r in table}[(alpha, beta)]
    assert chosen == max(r for _, _, r in table)


def test_huge_cloud_cost_avoids_hard_pool():
    # all samples have mu >= 0.55, so alpha=0.55 classifies none as hard;
    # making the cloud path ruinous must drive the search there
    rng = np.random.default_rng(5)
    recs = []
    for i in range(60):
        base = float(rng.uniform(0.56, 0.99))
        recs.append(make_record(f"v{i}", split="validation",
                                probs=[base, base, base],
                                conf={"mobile": 0.8, "edge": 0.85, "cloud": 0.9}))
    ts = make_set(recs)
    stats = tr.compute_stats(ts)
    p = tr.CostParams(lambda_unit=LAM, o_c=1000 * LAM, gamma=1000 * LAM)
    alpha, beta, table = tr.tune_thresholds(ts, stats, tr.ThresholdGrid(), p)
    assert alpha == 0.55
    hard_count = sum(tr.classify(stats.mu(r.id), stats.sigma(r.id), alpha, beta) == "hard"
                     for r in recs)
    assert hard_count == 0
    # per the table, every alpha=0.55 cell beats every cell with hard samples
    samples = validation_samples(ts, stats)
    _, otable = oracle_tune(samples, tr.ThresholdGrid().alphas, tr.ThresholdGrid().betas, p)
    for (a1, b1, r1), (_, _, r2) in zip(table, otable):
        assert abs(r1 - r2) < 1e-12


def test_tune_tie_breaks_to_smallest_pair():
    ts = make_set([make_record("v0", split="validation", probs=[0.95, 0.95, 0.95],
                               conf={"mobile": 0.9, "edge": 0.9, "cloud": 0.9})])
    stats = tr.compute_stats(ts)
    alpha, beta, table = tr.tune_thresholds(ts, stats, tr.ThresholdGrid(), default_costs())
    # mu=0.95 >= every alpha, sigma=0 <= every beta: all 25 cells tie
    assert len({r for _, _, r in table}) == 1
    assert (alpha, beta) == (0.55, 0.05)


def test_tune_invariant_under_record_permutation(bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    a1, b1, t1 = tr.tune_thresholds(bench_traces, stats, tr.ThresholdGrid(), bench_costs)
    rng = np.random.default_rng(1)
    shuffled = list(bench_traces.records)
    rng.shuffle(shuffled)
    ts2 = tr.TraceSet(D=bench_traces.D, E=bench_traces.E,
                      num_classes=bench_traces.num_classes, seed=None, note="",
                      records=shuffled)
    a2, b2, t2 = tr.tune_thresholds(ts2, tr.compute_stats(ts2), tr.ThresholdGrid(), bench_costs)
    assert (a1, b1) == (a2, b2)
    for (_, _, r1), (_, _, r2) in zip(t1, t2):
        assert abs(r1 - r2) < 1e-12


def test_reward_piecewise_constant_between_sample_stats(bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    mus = sorted(stats.mu(r.id) for r in bench_traces.split("validation"))
    gaps = [(a + b) / 2 for a, b in zip(mus, mus[1:]) if b - a > 1e-6]
    mid = gaps[len(gaps) // 2]
    eps = 1e-7
    r1 = tr.expected_reward(bench_traces, stats, mid - eps, 0.08, bench_costs)
    r2 = tr.expected_reward(bench_traces, stats, mid + eps, 0.08, bench_costs)
    assert r1 == r2


def test_constant_confidence_shift_shifts_reward(bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    grid = tr.ThresholdGrid()
    a1, b1, t1 = tr.tune_thresholds(bench_traces, stats, grid, bench_costs)
    c = 0.5
    shifted_records = []
    for rec in bench_traces.records:
        conf = {t: rec.tier_conf[t] + c for t in tr.TIERS}
        shifted_records.append(tr.SampleTrace(
            id=rec.id, split=rec.split, embedding=rec.embedding,
            epoch_true_probs=rec.epoch_true_probs, tier_conf=conf,
            tier_correct=rec.tier_correct, label=rec.label))
    ts2 = tr.TraceSet(D=bench_traces.D, E=bench_traces.E,
                      num_classes=bench_traces.num_classes, seed=None, note="",
                      records=shifted_records)
    a2, b2, t2 = tr.tune_thresholds(ts2, stats, grid, bench_costs)
    assert (a1, b1) == (a2, b2)
    for (_, _, r1), (_, _, r2) in zip(t1, t2):
        assert r2 - r1 == pytest.approx(c, abs=1e-9)


def test_reward_table_csv_round_trip(tmp_path, bench_traces, bench_costs):
    stats = tr.compute_stats(bench_traces)
    _, _, table = tr.tune_thresholds(bench_traces, stats, tr.ThresholdGrid(), bench_costs)
    path = tmp_path / "reward_table.csv"
    tr.write_reward_table(table, path)
    back = tr.read_reward_table(path)
    assert back == table


def test_empty_validation_errors():
    ts = make_set([make_record("t0", split="test")])
    with pytest.raises(tr.CostError, match="empty validation"):
        tr.expected_reward(ts, tr.CartographyStats(by_id={}), 0.7, 0.1, default_costs())
