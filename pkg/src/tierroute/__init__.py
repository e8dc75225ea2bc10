"""tierroute: cost-aware tiered-inference routing over mobile, edge, and cloud.

Validation samples are mapped by their training dynamics (mean and variance
of the true-label probability across epochs) into easy/medium/hard pools;
thresholds are tuned by exhaustive reward search; test samples are routed to
the tier of their nearest pool centroid, optionally updating centroids online
with a running mean.
"""
from .benchmark import benchmark_costs, benchmark_spec
from .cartography import (POOL_TIER, POOLS, CartographyError, CartographyStats,
                          PoolModel, SampleStats, build_pools, classify,
                          compute_stats, load_pools, save_pools)
from .costs import (DEFAULT_ALPHAS, DEFAULT_BETAS, CostError, CostParams,
                    ThresholdGrid, TierCosts, expected_reward, read_reward_table,
                    reward, tier_costs, tune_thresholds, write_reward_table)
from .harness import (POLICY_NAMES, ExperimentResult, HarnessError, Policy,
                      StreamMetrics, compare_policies, cost_sweep, read_metrics,
                      run_experiment, run_policy, write_metrics, write_sweep)
from .router import (RouterError, RouterState, RoutingDecision, read_decisions,
                     route_one, route_stream, write_decisions)
from .synthetic import (ARCHETYPES, ArchetypeSpec, DriftSpec, SyntheticSpec,
                        generate_synthetic, generate_with_counts)
from .traces import (SPLITS, TIERS, SampleTrace, TraceError, TraceSet,
                     read_traces, write_traces)

__version__ = "0.1.0"

__all__ = [
    "ARCHETYPES", "ArchetypeSpec", "CartographyError", "CartographyStats",
    "CostError", "CostParams", "DEFAULT_ALPHAS", "DEFAULT_BETAS", "DriftSpec",
    "ExperimentResult", "HarnessError", "POLICY_NAMES", "POOLS", "POOL_TIER",
    "Policy", "PoolModel", "RouterError", "RouterState", "RoutingDecision",
    "SPLITS", "SampleStats", "SampleTrace", "StreamMetrics", "SyntheticSpec",
    "TIERS", "ThresholdGrid", "TierCosts", "TraceError", "TraceSet",
    "benchmark_costs", "benchmark_spec", "build_pools", "classify",
    "compare_policies", "compute_stats", "cost_sweep", "expected_reward",
    "generate_synthetic", "generate_with_counts", "load_pools", "read_decisions",
    "read_metrics", "read_reward_table", "read_traces", "reward", "route_one",
    "route_stream", "run_experiment", "run_policy", "save_pools", "tier_costs",
    "tune_thresholds", "write_decisions", "write_metrics", "write_reward_table",
    "write_sweep", "write_traces",
]
