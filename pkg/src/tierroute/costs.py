"""Tier cost model, per-sample reward, and exhaustive threshold search.

All costs are expressed in multiples of the base unit lambda (the edge
device's per-layer processing cost).  A sample classified easy earns its
mobile confidence minus the mobile processing cost; medium earns the edge
confidence minus edge processing plus the mobile-to-edge offload; hard earns
the cloud confidence minus the mobile-to-cloud offload and the flat cloud
platform charge.  Thresholds are tuned by evaluating the empirical mean
reward on the validation split at every grid pair and keeping the argmax
(ties break toward the smallest alpha, then the smallest beta).

Grid-point evaluations are independent pure computations; the argmax
reduction applies the deterministic tie-break regardless of evaluation order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cartography import CartographyStats, classify
from .traces import TIERS, TraceSet

# Threshold grids used throughout unless a config overrides them.
DEFAULT_ALPHAS = (0.55, 0.6, 0.65, 0.7, 0.8)
DEFAULT_BETAS = (0.05, 0.08, 0.11, 0.14, 0.17)


class CostError(ValueError):
    """Invalid cost parameters, grid, or reward input."""


@dataclass(frozen=True)
class CostParams:
    """Cost structure: per-layer processing, offloading, cloud charge, and
    the layer counts of the three deployed model prefixes.

    Fields left as None default to the standard multiples of lambda_unit:
    lambda_m = 1.5x, lambda_e = 1x, o_e = 2.5x, o_c = 3x, gamma = 6x.
    """

    lambda_unit: float = 0.01
    lambda_m: float | None = None
    lambda_e: float | None = None
    o_e: float | None = None
    o_c: float | None = None
    gamma: float | None = None
    m: int = 4
    n: int = 6
    l: int = 12

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda_unit) and self.lambda_unit > 0):
            raise CostError(f"lambda_unit must be > 0, got {self.lambda_unit!r}")
        defaults = {"lambda_m": 1.5, "lambda_e": 1.0, "o_e": 2.5, "o_c": 3.0, "gamma": 6.0}
        for name, mult in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, mult * self.lambda_unit)
        for name in defaults:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise CostError(f"{name} must be a finite non-negative number, got {v!r}")
            object.__setattr__(self, name, float(v))
        for name in ("m", "n", "l"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise CostError(f"{name} must be an integer, got {v!r}")
        if not 1 <= self.m <= self.n <= self.l:
            raise CostError(f"layer counts must satisfy 1 <= m <= n <= l, "
                            f"got m={self.m}, n={self.n}, l={self.l}")

    @classmethod
    def large_scale(cls, lambda_unit: float = 0.01) -> "CostParams":
        """Layer split used with the larger backbone variant."""
        return cls(lambda_unit=lambda_unit, m=6, n=12, l=24)


@dataclass(frozen=True)
class TierCosts:
    """Per-sample cost of serving at each tier, derived from CostParams."""

    mobile: float
    edge: float
    cloud: float

    def for_tier(self, tier: str) -> float:
        if tier not in TIERS:
            raise CostError(f"unknown tier {tier!r}")
        return getattr(self, tier)


def tier_costs(params: CostParams) -> TierCosts:
    return TierCosts(
        mobile=params.lambda_m * params.m,
        edge=params.lambda_e * params.n + params.o_e,
        cloud=params.o_c + params.gamma,
    )


@dataclass(frozen=True)
class ThresholdGrid:
    """Candidate confidence thresholds (alphas) and variance thresholds (betas)."""

    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    betas: tuple[float, ...] = DEFAULT_BETAS

    def __post_init__(self) -> None:
        for name, values, lo_ok in (("alphas", self.alphas, lambda v: 0.0 <= v <= 1.0),
                                    ("betas", self.betas, lambda v: v >= 0.0)):
            if not values:
                raise CostError(f"{name} must be non-empty")
            if any(not (isinstance(v, (int, float)) and math.isfinite(v) and lo_ok(v)) for v in values):
                raise CostError(f"{name} contain an out-of-range value: {values}")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise CostError(f"{name} must be strictly increasing: {values}")

    def pairs(self) -> list[tuple[float, float]]:
        return [(a, b) for a in self.alphas for b in self.betas]


def reward(mu: float, sigma: float, conf: Mapping[str, float],
           alpha: float, beta: float, params: CostParams) -> float:
    """Confidence-minus-cost reward of serving one sample at the tier its
    (mu, sigma) classification selects."""
    for tier in TIERS:
        if tier not in conf:
            raise CostError(f"missing tier confidence for {tier!r}")
    pool = classify(mu, sigma, alpha, beta)
    if pool == "easy":
        return float(conf["mobile"]) - params.lambda_m * params.m
    if pool == "medium":
        return float(conf["edge"]) - params.lambda_e * params.n - params.o_e
    return float(conf["cloud"]) - params.o_c - params.gamma


def _validation_arrays(ts: TraceSet, stats: CartographyStats) -> tuple[np.ndarray, ...]:
    records = ts.split("validation")
    if not records:
        raise CostError("empty validation split: expected reward undefined")
    mu = np.empty(len(records))
    sigma = np.empty(len(records))
    conf = {t: np.empty(len(records)) for t in TIERS}
    for i, rec in enumerate(records):
        if rec.id not in stats:
            raise CostError(f"stats missing validation record {rec.id}")
        mu[i] = stats.mu(rec.id)
        sigma[i] = stats.sigma(rec.id)
        for t in TIERS:
            conf[t][i] = rec.tier_conf[t]
    return mu, sigma, conf["mobile"], conf["edge"], conf["cloud"]


def _mean_reward(mu: np.ndarray, sigma: np.ndarray, cm: np.ndarray, cn: np.ndarray,
                 cl: np.ndarray, alpha: float, beta: float, params: CostParams) -> float:
    easy = (mu >= alpha) & (sigma <= beta)
    medium = (mu >= alpha) & (sigma > beta)
    r = np.where(easy, cm - params.lambda_m * params.m,
                 np.where(medium, cn - params.lambda_e * params.n - params.o_e,
                          cl - params.o_c - params.gamma))
    return float(np.mean(r))


def expected_reward(ts: TraceSet, stats: CartographyStats,
                    alpha: float, beta: float, params: CostParams) -> float:
    """Empirical mean reward over the validation split."""
    mu, sigma, cm, cn, cl = _validation_arrays(ts, stats)
    return _mean_reward(mu, sigma, cm, cn, cl, alpha, beta, params)


def tune_thresholds(ts: TraceSet, stats: CartographyStats, grid: ThresholdGrid,
                    params: CostParams) -> tuple[float, float, list[tuple[float, float, float]]]:
    """Exhaustive search over the grid.

    Returns the reward-maximizing (alpha, beta) and the full table as
    (alpha, beta, expected_reward) rows in alpha-major grid order.  Equal
    rewards resolve to the smallest alpha, then the smallest beta.
    """
    mu, sigma, cm, cn, cl = _validation_arrays(ts, stats)
    table: list[tuple[float, float, float]] = []
    best: tuple[float, float] | None = None
    best_reward = -math.inf
    for alpha in grid.alphas:
        for beta in grid.betas:
            r = _mean_reward(mu, sigma, cm, cn, cl, alpha, beta, params)
            table.append((float(alpha), float(beta), r))
            if r > best_reward:
                best_reward = r
                best = (float(alpha), float(beta))
    assert best is not None
    return best[0], best[1], table


def write_reward_table(table: Sequence[tuple[float, float, float]], path: str | Path) -> None:
    """CSV export: alpha, beta, expected_reward with full-precision decimals."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "beta", "expected_reward"])
        for alpha, beta, r in table:
            writer.writerow([repr(float(alpha)), repr(float(beta)), repr(float(r))])


def read_reward_table(path: str | Path) -> list[tuple[float, float, float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["alpha", "beta", "expected_reward"]:
            raise CostError(f"unexpected reward table header: {header}")
        return [(float(a), float(b), float(r)) for a, b, r in reader]
