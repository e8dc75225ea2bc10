"""
Data map: confidence vs variability
===================================

Every validation sample is summarized by two training-dynamics numbers: the
mean probability assigned to its true label across epochs (confidence) and
the population variance of that probability (variability).  Plotted against
each other they form the familiar three-region map: a high-confidence mass
the small models handle, a high-variance band the model is undecided about,
and a low-confidence tail that needs the full model.
"""
# %%
# Generate a seeded benchmark trace set and compute the statistics.
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import tierroute as tr

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

traces = tr.generate_synthetic(tr.benchmark_spec(seed=0))
stats = tr.compute_stats(traces)
print(f"{len(stats)} validation samples, D={traces.D}, E={traces.E}")

# %%
# Slice the map with the threshold pair the reward search picks on this set
# (see 02_threshold_search.py) and look at the pool shares.
alpha, beta, _ = tr.tune_thresholds(traces, stats, tr.ThresholdGrid(),
                                    tr.benchmark_costs())
pools = tr.build_pools(traces, stats, alpha, beta)
print(f"tuned thresholds: alpha={alpha}, beta={beta}")
for pool, share in pools.proportions().items():
    print(f"  {pool:7s} {share:6.1%}  (n={pools.counts[pool]})")

# %%
# Scatter the map, colored by pool membership.
colors = {"easy": "tab:green", "medium": "tab:blue", "hard": "tab:red"}
fig, ax = plt.subplots(figsize=(6, 4.5))
for pool in tr.POOLS:
    ids = [i for i, p in pools.assignments.items() if p == pool]
    mus = [stats.mu(i) for i in ids]
    sigmas = [stats.sigma(i) for i in ids]
    ax.scatter(sigmas, mus, s=8, alpha=0.5, color=colors[pool], label=pool)
ax.axhline(alpha, color="k", lw=0.8, ls="--")
ax.axvline(beta, color="k", lw=0.8, ls=":")
ax.set_xlabel("variability (variance of true-label probability)")
ax.set_ylabel("confidence (mean true-label probability)")
ax.set_title(f"validation data map, alpha={alpha}, beta={beta}")
ax.legend(loc="lower right")
fig.tight_layout()
fig.savefig(OUT / "data_map.png", dpi=120)
print(f"wrote {OUT / 'data_map.png'}")

# %%
# The trace set itself round-trips through the JSON-Lines file format.
path = OUT / "benchmark_traces.jsonl"
tr.write_traces(traces, path)
back = tr.read_traces(path)
assert back == traces
print(f"round-tripped {len(back)} records through {path.name}")
