"""
Threshold search: reward over the grid
======================================

The thresholds that slice the data map are not free parameters: each pair
implies a per-sample reward (tier confidence minus the tier's cost), and the
tuner exhaustively evaluates the empirical mean reward over the whole grid.
This script prints the 5x5 reward table and shows how the argmax reacts when
the cloud gets pricier.
"""
# %%
import dataclasses

import numpy as np

import tierroute as tr

traces = tr.generate_synthetic(tr.benchmark_spec(seed=0))
stats = tr.compute_stats(traces)
grid = tr.ThresholdGrid()
params = tr.CostParams(lambda_unit=0.01)  # standard cost multiples

alpha, beta, table = tr.tune_thresholds(traces, stats, grid, params)
print(f"argmax thresholds: alpha={alpha}, beta={beta}")

# %%
# Render the table (rows: alpha, columns: beta).
by_pair = {(a, b): r for a, b, r in table}
header = "alpha\\beta " + "  ".join(f"{b:7.2f}" for b in grid.betas)
print(header)
for a in grid.alphas:
    row = "  ".join(f"{by_pair[(a, b)]:7.4f}" for b in grid.betas)
    marker = " <- argmax row" if a == alpha else ""
    print(f"{a:10.2f} {row}{marker}")

# %%
# Make offloading to the cloud eight times more expensive and re-tune: the
# search shifts toward thresholds that shrink the hard pool.
pricier = dataclasses.replace(params, o_c=8 * params.o_c)
alpha2, beta2, _ = tr.tune_thresholds(traces, stats, grid, pricier)
pools_before = tr.build_pools(traces, stats, alpha, beta)
pools_after = tr.build_pools(traces, stats, alpha2, beta2)
print(f"\no_c x8: argmax moves ({alpha}, {beta}) -> ({alpha2}, {beta2})")
print(f"hard-pool share: {pools_before.proportions()['hard']:.1%} -> "
      f"{pools_after.proportions()['hard']:.1%}")
