import math

import numpy as np
import pytest

import tierroute as tr

from conftest import make_record, make_set


def stats_for(probs, E=None):
    E = len(probs) if E is None else E
    ts = make_set([make_record("v0", split="validation", probs=probs)], E=E)
    return tr.compute_stats(ts).by_id["v0"]


def oracle_mean_var(probs):
    """Pure-python recomputation: mean, then population variance (divisor E)."""
    mu = math.fsum(probs) / len(probs)
    var = math.fsum((p - mu) ** 2 for p in probs) / len(probs)
    return mu, var


def test_constant_sequence():
    s = stats_for([0.9, 0.9, 0.9])
    assert s.mu_hat == 0.9
    assert s.sigma_hat == 0.0


def test_hand_worked_sequence():
    s = stats_for([0.9, 0.8, 1.0])
    assert abs(s.mu_hat - 0.9) < 1e-12
    assert abs(s.sigma_hat - 0.02 / 3) < 1e-12


def test_maximal_variance_sequence():
    s = stats_for([0.0, 1.0])
    assert s.mu_hat == 0.5
    assert s.sigma_hat == 0.25


def test_population_not_sample_variance():
    # sample variance (divisor E-1) would give 0.5 here
    assert stats_for([0.0, 1.0]).sigma_hat == 0.25


def test_matches_bruteforce_oracle():
    rng = np.random.default_rng(42)
    for _ in range(300):
        probs = rng.uniform(0, 1, int(rng.integers(1, 13))).tolist()
        mu, var = oracle_mean_var(probs)
        s = stats_for(probs, E=len(probs))
        assert abs(s.mu_hat - mu) < 1e-12
        assert abs(s.sigma_hat - var) < 1e-12


def test_epoch_permutation_invariant():
    rng = np.random.default_rng(7)
    probs = rng.uniform(0, 1, 8)
    s1 = stats_for(probs.tolist())
    s2 = stats_for(probs[::-1].tolist())
    assert s1.mu_hat == s2.mu_hat
    assert abs(s1.sigma_hat - s2.sigma_hat) < 1e-15


def test_variance_bound_holds():
    rng = np.random.default_rng(8)
    for _ in range(500):
        probs = rng.uniform(0, 1, int(rng.integers(1, 10))).tolist()
        s = stats_for(probs)
        assert s.sigma_hat <= s.mu_hat * (1 - s.mu_hat)
        assert s.sigma_hat <= 0.25


def test_missing_probs_and_zero_epochs_error():
    ts = make_set([make_record("t0", split="test")])
    ts.records[0].split = "validation"  # bypass construction check
    with pytest.raises(tr.CartographyError, match="missing epoch_true_probs"):
        tr.compute_stats(ts)
    empty = tr.TraceSet(D=4, E=0, num_classes=2, seed=None, note="")
    with pytest.raises(tr.CartographyError, match="E = 0"):
        tr.compute_stats(empty)


# --- classification ---------------------------------------------------------

def test_classify_three_regions():
    assert tr.classify(0.9, 0.05, 0.7, 0.1) == "easy"
    assert tr.classify(0.9, 0.20, 0.7, 0.1) == "medium"
    assert tr.classify(0.3, 0.01, 0.7, 0.1) == "hard"


def test_classify_boundaries():
    # variance exactly at the threshold stays easy; mean exactly at the
    # threshold stays non-hard
    assert tr.classify(0.9, 0.1, 0.7, 0.1) == "easy"
    assert tr.classify(0.7, 0.05, 0.7, 0.1) == "easy"
    assert tr.classify(0.7, 0.2, 0.7, 0.1) == "medium"


def test_classify_partitions_domain():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        mu = float(rng.uniform(0, 1))
        sigma = float(rng.uniform(0, 0.3))
        alpha = float(rng.uniform(0, 1))
        beta = float(rng.uniform(0, 0.3))
        pool = tr.classify(mu, sigma, alpha, beta)
        assert pool in tr.POOLS
        # independently recompute the case split
        if mu < alpha:
            assert pool == "hard"
        elif sigma <= beta:
            assert pool == "easy"
        else:
            assert pool == "medium"


def test_classify_monotone_in_thresholds():
    rng = np.random.default_rng(4)
    order = {"easy": 0, "medium": 0, "hard": 1}  # hardness level under alpha
    for _ in range(500):
        mu, sigma = float(rng.uniform(0, 1)), float(rng.uniform(0, 0.3))
        a1, a2 = sorted(rng.uniform(0, 1, 2))
        b = float(rng.uniform(0, 0.3))
        # raising alpha never moves a sample out of hard
        assert order[tr.classify(mu, sigma, a1, b)] <= order[tr.classify(mu, sigma, a2, b)]
        # raising beta never moves a sample from easy to medium
        b1, b2 = sorted(rng.uniform(0, 0.3, 2))
        a = float(rng.uniform(0, 1))
        if tr.classify(mu, sigma, a, b1) == "easy":
            assert tr.classify(mu, sigma, a, b2) == "easy"


def test_classify_rejects_invalid_inputs():
    with pytest.raises(tr.CartographyError):
        tr.classify(float("nan"), 0.1, 0.5, 0.1)
    with pytest.raises(tr.CartographyError):
        tr.classify(1.2, 0.1, 0.5, 0.1)
    with pytest.raises(tr.CartographyError):
        tr.classify(0.5, -0.1, 0.5, 0.1)
    with pytest.raises(tr.CartographyError):
        tr.classify(0.5, 0.1, 0.5, float("inf"))


# --- pools ------------------------------------------------------------------

def three_case_set():
    recs = [
        make_record("e", split="validation", embedding=[1.0, 0.0, 0.0, 0.0],
                    probs=[0.9, 0.9, 0.9]),                      # mu .9, sigma 0
        make_record("m", split="validation", embedding=[0.0, 1.0, 0.0, 0.0],
                    probs=[1.0, 0.2, 1.0]),                      # high variance
        make_record("h", split="validation", embedding=[0.0, 0.0, 1.0, 0.0],
                    probs=[0.3, 0.3, 0.3]),                      # low mean
    ]
    return make_set(recs)


def test_singleton_pools():
    ts = three_case_set()
    pools = tr.build_pools(ts, tr.compute_stats(ts), alpha=0.7, beta=0.1)
    assert pools.counts == {"easy": 1, "medium": 1, "hard": 1}
    assert np.array_equal(pools.centroids["easy"], [1.0, 0.0, 0.0, 0.0])
    assert np.array_equal(pools.centroids["medium"], [0.0, 1.0, 0.0, 0.0])
    assert np.array_equal(pools.centroids["hard"], [0.0, 0.0, 1.0, 0.0])
    assert pools.assignments == {"e": "easy", "m": "medium", "h": "hard"}


def test_all_easy_leaves_other_pools_absent():
    recs = [make_record(f"v{i}", split="validation", probs=[0.95, 0.95, 0.95],
                        embedding=[float(i), 0.0, 0.0, 0.0]) for i in range(4)]
    ts = make_set(recs)
    pools = tr.build_pools(ts, tr.compute_stats(ts), alpha=0.7, beta=0.1)
    assert pools.counts == {"easy": 4, "medium": 0, "hard": 0}
    assert pools.centroids["medium"] is None
    assert pools.centroids["hard"] is None


def test_centroids_match_bruteforce_mean(bench_traces):
    stats = tr.compute_stats(bench_traces)
    pools = tr.build_pools(bench_traces, stats, alpha=0.65, beta=0.08)
    members = {p: [] for p in tr.POOLS}
    for rec in bench_traces.split("validation"):
        members[pools.assignments[rec.id]].append(rec.embedding)
    for pool in tr.POOLS:
        if not members[pool]:
            assert pools.centroids[pool] is None
            continue
        stacked = np.stack(members[pool])
        oracle = np.array([math.fsum(stacked[:, j]) / len(stacked)
                           for j in range(stacked.shape[1])])
        assert np.max(np.abs(pools.centroids[pool] - oracle)) < 1e-12


def test_build_pools_order_insensitive(bench_traces):
    stats = tr.compute_stats(bench_traces)
    pools = tr.build_pools(bench_traces, stats, alpha=0.65, beta=0.08)
    rng = np.random.default_rng(0)
    shuffled = list(bench_traces.records)
    rng.shuffle(shuffled)
    ts2 = tr.TraceSet(D=bench_traces.D, E=bench_traces.E,
                      num_classes=bench_traces.num_classes,
                      seed=bench_traces.seed, note=bench_traces.note, records=shuffled)
    pools2 = tr.build_pools(ts2, stats, alpha=0.65, beta=0.08)
    assert pools.assignments == pools2.assignments
    assert pools.counts == pools2.counts
    for pool in tr.POOLS:
        if pools.centroids[pool] is not None:
            assert np.max(np.abs(pools.centroids[pool] - pools2.centroids[pool])) < 1e-9


def test_build_pools_errors():
    ts = make_set([make_record("t0", split="test")])
    with pytest.raises(tr.CartographyError, match="empty validation"):
        tr.build_pools(ts, tr.CartographyStats(by_id={}), 0.7, 0.1)
    ts = three_case_set()
    with pytest.raises(tr.CartographyError, match="stats missing"):
        tr.build_pools(ts, tr.CartographyStats(by_id={}), 0.7, 0.1)


def test_pools_json_round_trip(tmp_path, bench_traces):
    stats = tr.compute_stats(bench_traces)
    pools = tr.build_pools(bench_traces, stats, alpha=0.6, beta=0.11)
    path = tmp_path / "pools.json"
    tr.save_pools(pools, path)
    back = tr.load_pools(path)
    assert back.alpha == pools.alpha and back.beta == pools.beta
    assert back.counts == pools.counts
    assert back.assignments == pools.assignments
    for pool in tr.POOLS:
        a, b = pools.centroids[pool], back.centroids[pool]
        assert (a is None) == (b is None)
        if a is not None:
            assert np.array_equal(a, b)


def test_pool_model_validation():
    with pytest.raises(tr.CartographyError, match="counts do not add up"):
        tr.PoolModel(alpha=0.7, beta=0.1, D=2, assignments={"a": "easy"},
                     centroids={"easy": np.zeros(2), "medium": None, "hard": None},
                     counts={"easy": 2, "medium": 0, "hard": 0}).validate()
    with pytest.raises(tr.CartographyError, match="must carry no centroid"):
        tr.PoolModel(alpha=0.7, beta=0.1, D=2, assignments={},
                     centroids={"easy": np.zeros(2), "medium": None, "hard": None},
                     counts={"easy": 0, "medium": 0, "hard": 0}).validate()
