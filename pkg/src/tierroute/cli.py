"""Command-line surface: gen, pools, route, sweep, report.

Every command takes --config pointing at a run-config JSON document and
exits 0 only if all outputs were written and re-validated.  Failures print a
single machine-readable JSON line on stderr.  Output directories are guarded
by a lock file so concurrent invocations cannot interleave writes.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from filelock import FileLock, Timeout

from . import __version__
from .cartography import build_pools, compute_stats, load_pools, save_pools
from .config import RunConfig, apply_overrides, parse_config
from .harness import (Policy, compare_policies, cost_sweep, read_metrics,
                      run_policy, write_metrics, write_sweep)
from .costs import tune_thresholds, write_reward_table
from .router import write_decisions
from .synthetic import ARCHETYPES, generate_with_counts
from .traces import read_traces, write_traces

logger = logging.getLogger("tierroute")

LOCK_NAME = ".tierroute.lock"


class CliError(ValueError):
    """Command cannot proceed; message is user-facing."""


def _setup_logging() -> None:
    level_name = os.environ.get("TIERROUTE_LOG", "").lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(level_name, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _lock(directory: Path) -> FileLock:
    directory.mkdir(parents=True, exist_ok=True)
    lock = FileLock(directory / LOCK_NAME)
    try:
        lock.acquire(timeout=0.0)
    except Timeout:
        raise CliError(f"output directory is locked by another run: {directory}")
    return lock


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = parse_config(args.config)
    values = None
    if getattr(args, "values", None):
        values = [float(v) for v in args.values.split(",") if v.strip()]
    return apply_overrides(cfg, out=args.out, seed=args.seed,
                           policies=getattr(args, "policy", None),
                           mode=getattr(args, "mode", None),
                           vary=getattr(args, "vary", None), values=values)


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if cfg.synthetic is None:
        raise CliError("config has no synthetic section; nothing to generate")
    if cfg.traces is None:
        raise CliError("config.traces must name the output trace file")
    traces, counts = generate_with_counts(cfg.synthetic)
    lock = _lock(cfg.traces.parent)
    try:
        write_traces(traces, cfg.traces)
        read_traces(cfg.traces)  # written output must re-validate
    finally:
        lock.release()
    totals = {a: sum(counts[s][a] for s in counts) for a in ARCHETYPES}
    print(f"wrote {len(traces)} records to {cfg.traces}")
    for split, per in counts.items():
        if sum(per.values()):
            print(f"  {split}: " + ", ".join(f"{a}={per[a]}" for a in ARCHETYPES))
    print("  total: " + ", ".join(f"{a}={totals[a]}" for a in ARCHETYPES))
    return 0


def _read_input_traces(cfg: RunConfig):
    if cfg.traces is None:
        raise CliError("config.traces must name the input trace file")
    return read_traces(cfg.traces)


def cmd_pools(args: argparse.Namespace) -> int:
    cfg = _load(args)
    traces = _read_input_traces(cfg)
    stats = compute_stats(traces)
    alpha, beta, table = tune_thresholds(traces, stats, cfg.grid, cfg.costs)
    pools = build_pools(traces, stats, alpha, beta)
    lock = _lock(cfg.out)
    try:
        save_pools(pools, cfg.out / "pools.json")
        write_reward_table(table, cfg.out / "reward_table.csv")
        load_pools(cfg.out / "pools.json")
    finally:
        lock.release()
    proportions = pools.proportions()
    print(f"tuned thresholds: alpha={alpha} beta={beta}")
    print("pool proportions: " + ", ".join(f"{p}={proportions[p]:.4f}" for p in proportions))
    print(f"wrote {cfg.out / 'pools.json'} and {cfg.out / 'reward_table.csv'}")
    return 0


def cmd_route(args: argparse.Namespace) -> int:
    cfg = _load(args)
    traces = _read_input_traces(cfg)
    pools = None
    built_inline = False
    if cfg.pools is not None:
        pools = load_pools(cfg.pools)
    needs_pools = any(p.is_cartography for p in cfg.policies)
    reward_table = None
    if needs_pools and pools is None:
        stats = compute_stats(traces)
        alpha, beta, reward_table = tune_thresholds(traces, stats, cfg.grid, cfg.costs)
        pools = build_pools(traces, stats, alpha, beta)
        built_inline = True
    rows = []
    decision_logs = {}
    for policy in cfg.policies:
        result = run_policy(traces, cfg.costs, policy,
                            grid=cfg.grid, baseline=cfg.baseline,
                            pools=pools if policy.is_cartography else None)
        rows.append(result.metrics)
        decision_logs[policy.name] = result.decisions
    lock = _lock(cfg.out)
    try:
        write_metrics(rows, cfg.out / "metrics.json")
        first = cfg.policies[0].name
        write_decisions(decision_logs[first], cfg.out / "decisions.csv")
        for name, decisions in decision_logs.items():
            write_decisions(decisions, cfg.out / f"decisions_{name}.csv")
        if built_inline:
            save_pools(pools, cfg.out / "pools.json")
            write_reward_table(reward_table, cfg.out / "reward_table.csv")
        read_metrics(cfg.out / "metrics.json")
    finally:
        lock.release()
    for m in rows:
        print(f"{m.policy}: accuracy={m.accuracy:.4f} mean_cost={m.mean_cost:.6f} "
              f"dcost={m.cost_vs_baseline_pct:+.1f}% vs {m.baseline}")
    print(f"wrote {cfg.out / 'metrics.json'} and decision logs")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if cfg.sweep_vary is None or not cfg.sweep_values:
        raise CliError("sweep requires --vary and --values (or a config sweep section)")
    traces = _read_input_traces(cfg)
    rows = cost_sweep(traces, cfg.costs, cfg.grid, cfg.sweep_vary, cfg.sweep_values,
                      mode=cfg.mode)
    lock = _lock(cfg.out)
    try:
        write_sweep(rows, cfg.out / "sweep.csv")
    finally:
        lock.release()
    for row in rows:
        print(f"{row['vary']}={row['value']}: accuracy={row['accuracy']:.4f} "
              f"mean_cost={row['mean_cost']:.6f} cloud_frac={row['frac_cloud']:.3f}")
    print(f"wrote {cfg.out / 'sweep.csv'}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _load(args)
    path = cfg.out / "metrics.json"
    if not path.exists():
        raise CliError(f"no metrics found at {path}; run `tierroute route` first")
    rows = read_metrics(path)
    headers = ["policy", "accuracy", "mean_cost", "dcost%", "mobile", "edge", "cloud"]
    lines = [headers]
    for m in rows:
        lines.append([m["policy"], f"{m['accuracy']:.4f}", f"{m['mean_cost']:.6f}",
                      f"{m['cost_vs_baseline_pct']:+.1f}",
                      str(m["tier_counts"]["mobile"]), str(m["tier_counts"]["edge"]),
                      str(m["tier_counts"]["cloud"])])
    widths = [max(len(row[i]) for row in lines) for i in range(len(headers))]
    for row in lines:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


def _add_common(parser: argparse.ArgumentParser, *, policies: bool = False,
                mode: bool = False, sweep: bool = False) -> None:
    parser.add_argument("--config", required=True, metavar="PATH",
                        help="run-config JSON document")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, metavar="INT",
                        help="seed override for seeded randomness")
    if policies:
        parser.add_argument("--policy", action="append", metavar="NAME",
                            help="policy to run (repeatable; overrides config list)")
    if mode:
        parser.add_argument("--mode", choices=("fixed", "adaptive"),
                            help="centroid update mode for cartography routing")
    if sweep:
        parser.add_argument("--vary", metavar="NAME",
                            help="cost parameter to sweep: lambda_m, lambda_e, or o_c")
        parser.add_argument("--values", metavar="CSV-LIST",
                            help="comma-separated sweep values (absolute, in cost units)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tierroute",
        description="Cost-aware tiered-inference routing: generate traces, build "
                    "pools, tune thresholds, route streams, and sweep costs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic trace file from config.synthetic")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("pools", help="tune thresholds and write pools.json + reward_table.csv")
    _add_common(p)
    p.set_defaults(func=cmd_pools)

    p = sub.add_parser("route", help="route the test stream under the configured policies")
    _add_common(p, policies=True, mode=True)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("sweep", help="re-tune and re-route while varying one cost parameter")
    _add_common(p, mode=True, sweep=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="print the metrics table from a previous route run")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
