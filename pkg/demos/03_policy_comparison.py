"""
Policy comparison: accuracy against cost
========================================

Runs every routing policy over the same test stream and prints the familiar
results table: accuracy, mean per-sample cost, and the signed cost change
against serving everything from the cloud.  The nearest-centroid policies
should sit near cloud-level accuracy at a fraction of its cost; the random
baseline shows that the pools, not mere tier mixing, carry the benefit; the
cheapest-correct oracle bounds what any router could do on these traces.
"""
# %%
import tierroute as tr

traces = tr.generate_synthetic(tr.benchmark_spec(seed=0))
params = tr.benchmark_costs()
grid = tr.ThresholdGrid()

policies = [
    tr.Policy("cloud_only"),
    tr.Policy("edge_only"),
    tr.Policy("mobile_only"),
    tr.Policy("random_uniform", seed=0),
    tr.Policy("cartography_fixed"),
    tr.Policy("cartography_adaptive"),
    tr.Policy("oracle_cheapest_correct"),
]
rows = tr.compare_policies(traces, params, grid, policies)

# %%
print(f"{'policy':26s} {'acc':>7s} {'mean cost':>10s} {'dcost%':>8s} "
      f"{'mobile':>7s} {'edge':>6s} {'cloud':>6s}")
for m in rows:
    print(f"{m.policy:26s} {m.accuracy:7.4f} {m.mean_cost:10.6f} "
          f"{m.cost_vs_baseline_pct:+8.1f} {m.tier_counts['mobile']:7d} "
          f"{m.tier_counts['edge']:6d} {m.tier_counts['cloud']:6d}")

# %%
# The tuned thresholds and validation pool shares behind the two
# nearest-centroid rows:
carto = next(m for m in rows if m.policy == "cartography_adaptive")
print(f"\ntuned alpha={carto.alpha}, beta={carto.beta}")
print("validation pool shares:",
      {p: round(v, 3) for p, v in carto.pool_proportions.items()})
