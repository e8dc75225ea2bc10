"""End-to-end experiment driver.

Runs a policy over a trace set's test stream and aggregates accuracy, cost,
and tier counts.  The cartography policies tune thresholds on the validation
split, build pools, and route by nearest centroid (fixed or adaptive); the
baselines send every sample to one tier, to a seeded uniformly random tier,
or (as an upper-bound reference) to the cheapest tier that happens to be
correct.  Distinct policies and sweep points are independent and may run in
parallel; each adaptive run is internally sequential.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cartography import POOLS, CartographyStats, PoolModel, build_pools, compute_stats
from .costs import CostParams, ThresholdGrid, TierCosts, tier_costs, tune_thresholds
from .router import RouterState, RoutingDecision, route_stream
from .traces import TIERS, TraceSet

METRICS_FILE_KIND = "tierroute-metrics"
METRICS_FILE_VERSION = 1

CARTOGRAPHY_POLICIES = ("cartography_fixed", "cartography_adaptive")
SINGLE_TIER_POLICIES = {"mobile_only": "mobile", "edge_only": "edge", "cloud_only": "cloud"}
POLICY_NAMES = CARTOGRAPHY_POLICIES + tuple(SINGLE_TIER_POLICIES) + (
    "random_uniform", "oracle_cheapest_correct")

SWEEPABLE = ("lambda_m", "lambda_e", "o_c")

SWEEP_HEADER = ["vary", "value", "alpha", "beta", "accuracy", "mean_cost",
                "total_cost", "dcost_pct_vs_cloud_only",
                "frac_mobile", "frac_edge", "frac_cloud"]


class HarnessError(ValueError):
    """Invalid experiment input."""


@dataclass(frozen=True)
class Policy:
    """A routing policy; the random baseline carries its own seed."""

    name: str
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.name not in POLICY_NAMES:
            raise HarnessError(f"unknown policy {self.name!r} (expected one of {POLICY_NAMES})")
        if self.name == "random_uniform" and self.seed is None:
            raise HarnessError("random_uniform requires a seed")

    @property
    def is_cartography(self) -> bool:
        return self.name in CARTOGRAPHY_POLICIES

    @property
    def mode(self) -> str:
        if not self.is_cartography:
            raise HarnessError(f"policy {self.name} has no routing mode")
        return "adaptive" if self.name == "cartography_adaptive" else "fixed"


@dataclass(frozen=True)
class StreamMetrics:
    """Aggregates over one policy's decision log."""

    policy: str
    n: int
    accuracy: float
    mean_cost: float
    total_cost: float
    tier_counts: dict[str, int]
    cost_vs_baseline_pct: float
    baseline: str
    alpha: float | None = None
    beta: float | None = None
    pool_proportions: dict[str, float] | None = None

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "n": self.n,
            "accuracy": self.accuracy,
            "mean_cost": self.mean_cost,
            "total_cost": self.total_cost,
            "tier_counts": {t: self.tier_counts[t] for t in TIERS},
            "cost_vs_baseline_pct": self.cost_vs_baseline_pct,
            "baseline": self.baseline,
            "alpha": self.alpha,
            "beta": self.beta,
            "pool_proportions": self.pool_proportions,
        }


@dataclass(frozen=True)
class ExperimentResult:
    metrics: StreamMetrics
    decisions: list[RoutingDecision]
    pools: PoolModel | None
    reward_table: list[tuple[float, float, float]] | None
    final_state: RouterState | None


def _baseline_mean_cost(baseline: str, costs: TierCosts) -> float:
    if baseline not in SINGLE_TIER_POLICIES:
        raise HarnessError(f"baseline must be a single-tier policy, got {baseline!r}")
    return costs.for_tier(SINGLE_TIER_POLICIES[baseline])


def _metrics_from_decisions(policy: Policy, decisions: Sequence[RoutingDecision],
                            costs: TierCosts, baseline: str,
                            pools: PoolModel | None) -> StreamMetrics:
    n = len(decisions)
    if n == 0:
        raise HarnessError("no decisions: empty test stream")
    # total_cost is the plain left-to-right sum of the log; downstream checks
    # re-derive it the same way so the two agree exactly.
    total = 0.0
    correct = 0
    counts = {t: 0 for t in TIERS}
    for d in decisions:
        total += d.cost
        correct += int(d.correct)
        counts[d.tier] += 1
    mean_cost = total / n
    base = _baseline_mean_cost(baseline, costs)
    # a policy measured against itself differs by definition by exactly 0%
    dcost = 0.0 if policy.name == baseline else 100.0 * (mean_cost - base) / base
    return StreamMetrics(
        policy=policy.name, n=n, accuracy=correct / n,
        mean_cost=mean_cost, total_cost=total, tier_counts=counts,
        cost_vs_baseline_pct=dcost,
        baseline=baseline,
        alpha=None if pools is None else pools.alpha,
        beta=None if pools is None else pools.beta,
        pool_proportions=None if pools is None else pools.proportions(),
    )


def _fixed_tier_decisions(records, tier: str, costs: TierCosts) -> list[RoutingDecision]:
    empty = {p: None for p in POOLS}
    return [RoutingDecision(id=r.id, tier=tier, distances=dict(empty),
                            cost=costs.for_tier(tier), correct=r.tier_correct[tier])
            for r in records]


def _random_decisions(records, seed: int, costs: TierCosts) -> list[RoutingDecision]:
    rng = np.random.default_rng(seed)
    empty = {p: None for p in POOLS}
    out = []
    for r in records:
        tier = TIERS[int(rng.integers(len(TIERS)))]
        out.append(RoutingDecision(id=r.id, tier=tier, distances=dict(empty),
                                   cost=costs.for_tier(tier), correct=r.tier_correct[tier]))
    return out


def _oracle_decisions(records, costs: TierCosts) -> list[RoutingDecision]:
    empty = {p: None for p in POOLS}
    by_cost = sorted(TIERS, key=lambda t: (costs.for_tier(t), TIERS.index(t)))
    out = []
    for r in records:
        tier = next((t for t in by_cost if r.tier_correct[t]), "cloud")
        out.append(RoutingDecision(id=r.id, tier=tier, distances=dict(empty),
                                   cost=costs.for_tier(tier), correct=r.tier_correct[tier]))
    return out


def run_policy(traces: TraceSet, params: CostParams, policy: Policy, *,
               grid: ThresholdGrid | None = None,
               pools: PoolModel | None = None,
               baseline: str = "cloud_only") -> ExperimentResult:
    """Run one policy over the test stream.

    Cartography policies need either prebuilt pools or a grid to tune with;
    when tuning, the validation split must carry per-epoch probabilities.
    """
    test = traces.split("test")
    if not test:
        raise HarnessError("traces have no test split")
    costs = tier_costs(params)
    reward_table = None
    final_state = None
    if policy.is_cartography:
        if pools is None:
            if grid is None:
                grid = ThresholdGrid()
            if not traces.split("validation"):
                raise HarnessError("cartography policies need a validation split")
            stats = compute_stats(traces)
            alpha, beta, reward_table = tune_thresholds(traces, stats, grid, params)
            pools = build_pools(traces, stats, alpha, beta)
        state = RouterState.from_pools(pools, policy.mode)
        decisions, final_state = route_stream(state, test, costs)
    elif policy.name in SINGLE_TIER_POLICIES:
        pools = None
        decisions = _fixed_tier_decisions(test, SINGLE_TIER_POLICIES[policy.name], costs)
    elif policy.name == "random_uniform":
        pools = None
        decisions = _random_decisions(test, policy.seed, costs)
    else:
        pools = None
        decisions = _oracle_decisions(test, costs)
    metrics = _metrics_from_decisions(policy, decisions, costs, baseline, pools)
    return ExperimentResult(metrics=metrics, decisions=decisions, pools=pools,
                            reward_table=reward_table, final_state=final_state)


def run_experiment(traces: TraceSet, params: CostParams, grid: ThresholdGrid,
                   policy: Policy, *, baseline: str = "cloud_only") -> ExperimentResult:
    """Full pipeline for one policy: tune thresholds, build pools, route."""
    return run_policy(traces, params, policy, grid=grid, baseline=baseline)


def compare_policies(traces: TraceSet, params: CostParams, grid: ThresholdGrid,
                     policies: Sequence[Policy], *,
                     baseline: str = "cloud_only") -> list[StreamMetrics]:
    """Run every policy on identical inputs; one metrics row per policy.

    Cartography policies share one tuned pool model so fixed and adaptive
    modes are compared against the same starting centroids.
    """
    shared_pools: PoolModel | None = None
    rows = []
    for policy in policies:
        if policy.is_cartography and shared_pools is None:
            stats = compute_stats(traces)
            alpha, beta, _ = tune_thresholds(traces, stats, grid, params)
            shared_pools = build_pools(traces, stats, alpha, beta)
        result = run_policy(traces, params, policy,
                            grid=grid, baseline=baseline,
                            pools=shared_pools if policy.is_cartography else None)
        rows.append(result.metrics)
    return rows


def cost_sweep(traces: TraceSet, params: CostParams, grid: ThresholdGrid,
               vary: str, values: Sequence[float], *,
               mode: str = "adaptive") -> list[dict]:
    """Re-tune and re-route at each value of one cost parameter."""
    if vary not in SWEEPABLE:
        raise HarnessError(f"vary must be one of {SWEEPABLE}, got {vary!r}")
    for v in values:
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            raise HarnessError(f"sweep values must be finite and >= 0, got {v!r}")
    policy = Policy("cartography_adaptive" if mode == "adaptive" else "cartography_fixed")
    rows = []
    for value in values:
        swept = dataclasses.replace(params, **{vary: float(value)})
        result = run_policy(traces, swept, policy, grid=grid)
        m = result.metrics
        rows.append({
            "vary": vary, "value": float(value),
            "alpha": m.alpha, "beta": m.beta,
            "accuracy": m.accuracy, "mean_cost": m.mean_cost, "total_cost": m.total_cost,
            "dcost_pct_vs_cloud_only": m.cost_vs_baseline_pct,
            "frac_mobile": m.tier_counts["mobile"] / m.n,
            "frac_edge": m.tier_counts["edge"] / m.n,
            "frac_cloud": m.tier_counts["cloud"] / m.n,
        })
    return rows


def write_metrics(rows: Sequence[StreamMetrics], path: str | Path) -> None:
    doc = {"kind": METRICS_FILE_KIND, "version": METRICS_FILE_VERSION,
           "policies": [m.to_dict() for m in rows]}
    Path(path).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def read_metrics(path: str | Path) -> list[dict]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if obj.get("kind") != METRICS_FILE_KIND:
        raise HarnessError(f"not a metrics document (kind={obj.get('kind')!r})")
    return obj["policies"]


def write_sweep(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([row["vary"]] + [repr(float(row[k])) for k in SWEEP_HEADER[1:]])
