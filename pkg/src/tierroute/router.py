"""Streaming tier assignment by nearest pool centroid.

Each incoming sample is routed to the tier of the closest pool centroid
(Euclidean distance; easy -> mobile, medium -> edge, hard -> cloud).  In
fixed mode the centroids stay frozen; in adaptive mode the winning centroid
is replaced by the running mean (n*c + x) / (n + 1) and its count grows by
one, so the pools track the incoming distribution.

Adaptive routing is inherently sequential; route_one never mutates its input
state, it returns a fresh state instead, so fixed-mode batches can fan out
safely across workers.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cartography import POOL_TIER, POOLS, PoolModel
from .costs import TierCosts
from .traces import SampleTrace

logger = logging.getLogger(__name__)

MODES = ("fixed", "adaptive")

DECISIONS_HEADER = ["id", "tier", "d_easy", "d_medium", "d_hard", "cost", "correct"]


class RouterError(ValueError):
    """Invalid router state or sample."""


@dataclass(frozen=True)
class RouterState:
    """Pool centroids and counts at one point in the stream."""

    centroids: dict[str, np.ndarray | None]
    counts: dict[str, int]
    mode: str
    D: int
    metric: str = "euclidean"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise RouterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.metric != "euclidean":
            raise RouterError(f"unsupported distance metric {self.metric!r}")
        for pool in POOLS:
            c = self.centroids.get(pool)
            n = self.counts.get(pool, 0)
            if c is not None and n < 1:
                raise RouterError(f"pool {pool} has a centroid but count {n}")

    @classmethod
    def from_pools(cls, pools: PoolModel, mode: str) -> "RouterState":
        for pool in POOLS:
            if pools.centroids[pool] is None:
                logger.warning("pool %s is empty; its tier can never be routed to", pool)
        return cls(centroids={p: (None if pools.centroids[p] is None
                                  else np.array(pools.centroids[p], dtype=float))
                              for p in POOLS},
                   counts={p: int(pools.counts[p]) for p in POOLS},
                   mode=mode, D=pools.D)


@dataclass(frozen=True)
class RoutingDecision:
    """One sample's tier assignment with its distances, cost, and outcome."""

    id: str
    tier: str
    distances: dict[str, float | None]
    cost: float
    correct: bool


def route_one(state: RouterState, sample: SampleTrace,
              costs: TierCosts) -> tuple[RoutingDecision, RouterState]:
    """Route one sample; returns the decision and the post-sample state."""
    x = np.asarray(sample.embedding, dtype=float)
    if x.shape != (state.D,):
        raise RouterError(f"sample {sample.id}: embedding dimension mismatch "
                          f"(got {x.shape}, expected ({state.D},))")
    distances: dict[str, float | None] = {}
    winner: str | None = None
    best = np.inf
    for pool in POOLS:
        c = state.centroids[pool]
        if c is None:
            distances[pool] = None
            continue
        d = float(np.linalg.norm(x - c))
        distances[pool] = d
        if d < best:  # strict: the first minimal pool (cheapest tier) wins ties
            best = d
            winner = pool
    if winner is None:
        raise RouterError("all pool centroids are absent; cannot route")
    tier = POOL_TIER[winner]
    decision = RoutingDecision(id=sample.id, tier=tier, distances=distances,
                               cost=costs.for_tier(tier), correct=sample.tier_correct[tier])
    if state.mode == "fixed":
        return decision, state
    n = state.counts[winner]
    updated = (n * state.centroids[winner] + x) / (n + 1)
    centroids = dict(state.centroids)
    centroids[winner] = updated
    counts = dict(state.counts)
    counts[winner] = n + 1
    return decision, RouterState(centroids=centroids, counts=counts,
                                 mode=state.mode, D=state.D, metric=state.metric)


def route_stream(state: RouterState, samples: Iterable[SampleTrace],
                 costs: TierCosts) -> tuple[list[RoutingDecision], RouterState]:
    """Fold route_one left to right; decisions keep the input order."""
    decisions: list[RoutingDecision] = []
    for sample in samples:
        decision, state = route_one(state, sample, costs)
        decisions.append(decision)
    return decisions, state


def write_decisions(decisions: Sequence[RoutingDecision], path: str | Path) -> None:
    """CSV decision log; numeric fields use full-precision decimals and a
    missing centroid's distance is left empty."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DECISIONS_HEADER)
        for d in decisions:
            row = [d.id, d.tier]
            for pool in POOLS:
                dist = d.distances.get(pool)
                row.append("" if dist is None else repr(float(dist)))
            row.append(repr(float(d.cost)))
            row.append("true" if d.correct else "false")
            writer.writerow(row)


def read_decisions(path: str | Path) -> list[RoutingDecision]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != DECISIONS_HEADER:
            raise RouterError(f"unexpected decisions header: {header}")
        out = []
        for rec_id, tier, d_easy, d_medium, d_hard, cost, correct in reader:
            distances = {p: (None if v == "" else float(v))
                         for p, v in zip(POOLS, (d_easy, d_medium, d_hard))}
            out.append(RoutingDecision(id=rec_id, tier=tier, distances=distances,
                                       cost=float(cost), correct=(correct == "true")))
        return out
