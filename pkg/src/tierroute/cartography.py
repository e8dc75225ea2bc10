"""Training-dynamics statistics and complexity pools.

For each validation sample the mean and population variance of the true-label
probability across training epochs locate it on a confidence/variability map.
Two thresholds slice the map into three pools:

    easy    mean >= alpha and variance <= beta   (inferred on mobile)
    medium  mean >= alpha and variance >  beta   (inferred on edge)
    hard    mean <  alpha                        (inferred on cloud)

Boundary ties are part of the contract: variance == beta is easy, mean ==
alpha is non-hard.  Pool centroids are plain arithmetic means of the member
embeddings; a pool with no members carries no centroid (never a zero vector).

Everything here is a pure function over immutable inputs and safe to evaluate
in parallel across samples.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .traces import SampleTrace, TraceError, TraceSet

POOLS = ("easy", "medium", "hard")
POOL_TIER = {"easy": "mobile", "medium": "edge", "hard": "cloud"}

POOLS_FILE_KIND = "tierroute-pools"
POOLS_FILE_VERSION = 1

# Slack for float rounding when checking the variance upper bound 1/4.
_VAR_EPS = 1e-12


class CartographyError(ValueError):
    """Invalid input to a cartography computation."""


@dataclass(frozen=True)
class SampleStats:
    mu_hat: float
    sigma_hat: float


@dataclass(frozen=True)
class CartographyStats:
    """Per-sample (mu_hat, sigma_hat) keyed by record id."""

    by_id: dict[str, SampleStats]

    def mu(self, rec_id: str) -> float:
        return self.by_id[rec_id].mu_hat

    def sigma(self, rec_id: str) -> float:
        return self.by_id[rec_id].sigma_hat

    def __len__(self) -> int:
        return len(self.by_id)

    def __contains__(self, rec_id: str) -> bool:
        return rec_id in self.by_id


def compute_stats(ts: TraceSet) -> CartographyStats:
    """Mean and population variance of per-epoch true-label probabilities
    for every validation record."""
    if ts.E < 1:
        raise CartographyError("trace set declares E = 0 epochs; statistics undefined")
    by_id: dict[str, SampleStats] = {}
    for rec in ts.split("validation"):
        probs = rec.epoch_true_probs
        if probs is None:
            raise CartographyError(f"record {rec.id}: missing epoch_true_probs")
        if len(probs) != ts.E:
            raise CartographyError(f"record {rec.id}: epoch count mismatch")
        mu = float(np.mean(probs))
        sigma = float(np.mean((np.asarray(probs, dtype=float) - mu) ** 2))
        if not 0.0 <= mu <= 1.0 or sigma < 0.0 or sigma > 0.25 + _VAR_EPS:
            raise CartographyError(f"record {rec.id}: statistics out of range "
                                   f"(mu={mu!r}, sigma={sigma!r})")
        by_id[rec.id] = SampleStats(mu_hat=mu, sigma_hat=sigma)
    return CartographyStats(by_id=by_id)


def classify(mu: float, sigma: float, alpha: float, beta: float) -> str:
    """Assign a (mu, sigma) point to one pool; total on the valid domain."""
    for name, value in (("mu", mu), ("sigma", sigma), ("alpha", alpha), ("beta", beta)):
        if not math.isfinite(value):
            raise CartographyError(f"{name} must be finite, got {value!r}")
    if not 0.0 <= mu <= 1.0 or not 0.0 <= alpha <= 1.0:
        raise CartographyError(f"mu and alpha must lie in [0,1], got mu={mu!r}, alpha={alpha!r}")
    if sigma < 0.0 or beta < 0.0:
        raise CartographyError(f"sigma and beta must be >= 0, got sigma={sigma!r}, beta={beta!r}")
    if mu < alpha:
        return "hard"
    return "easy" if sigma <= beta else "medium"


@dataclass(frozen=True)
class PoolModel:
    """Pool membership, centroids, counts and the thresholds that built them."""

    alpha: float
    beta: float
    D: int
    assignments: dict[str, str]
    centroids: dict[str, np.ndarray | None]
    counts: dict[str, int]

    def proportions(self) -> dict[str, float]:
        total = sum(self.counts.values())
        return {p: self.counts[p] / total for p in POOLS}

    def validate(self) -> None:
        if set(self.centroids) != set(POOLS) or set(self.counts) != set(POOLS):
            raise CartographyError(f"centroids and counts must have keys {POOLS}")
        if sum(self.counts.values()) != len(self.assignments):
            raise CartographyError("pool counts do not add up to the number of pooled samples")
        for pool in POOLS:
            n = self.counts[pool]
            c = self.centroids[pool]
            if n == 0 and c is not None:
                raise CartographyError(f"empty pool {pool} must carry no centroid")
            if n > 0:
                if c is None:
                    raise CartographyError(f"non-empty pool {pool} missing its centroid")
                if np.asarray(c).shape != (self.D,):
                    raise CartographyError(f"pool {pool} centroid has wrong dimension")

    def to_dict(self) -> dict:
        return {
            "kind": POOLS_FILE_KIND,
            "version": POOLS_FILE_VERSION,
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "D": int(self.D),
            "counts": {p: int(self.counts[p]) for p in POOLS},
            "proportions": {p: self.counts[p] / max(1, sum(self.counts.values())) for p in POOLS},
            "centroids": {p: (None if self.centroids[p] is None
                              else [float(v) for v in self.centroids[p]]) for p in POOLS},
            "assignments": dict(self.assignments),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "PoolModel":
        if obj.get("kind") != POOLS_FILE_KIND:
            raise CartographyError(f"not a pools document (kind={obj.get('kind')!r})")
        if obj.get("version") != POOLS_FILE_VERSION:
            raise CartographyError(f"unsupported pools version {obj.get('version')!r}")
        centroids = {p: (None if obj["centroids"][p] is None
                         else np.asarray(obj["centroids"][p], dtype=float)) for p in POOLS}
        model = cls(alpha=float(obj["alpha"]), beta=float(obj["beta"]), D=int(obj["D"]),
                    assignments=dict(obj["assignments"]), centroids=centroids,
                    counts={p: int(obj["counts"][p]) for p in POOLS})
        model.validate()
        return model


def build_pools(ts: TraceSet, stats: CartographyStats, alpha: float, beta: float) -> PoolModel:
    """Assign every validation sample to a pool and average each pool's
    embeddings into its centroid."""
    records = ts.split("validation")
    if not records:
        raise CartographyError("empty validation split: cannot build pools")
    assignments: dict[str, str] = {}
    members: dict[str, list[np.ndarray]] = {p: [] for p in POOLS}
    for rec in records:
        if rec.id not in stats:
            raise CartographyError(f"stats missing validation record {rec.id}")
        pool = classify(stats.mu(rec.id), stats.sigma(rec.id), alpha, beta)
        assignments[rec.id] = pool
        members[pool].append(rec.embedding)
    centroids: dict[str, np.ndarray | None] = {}
    counts: dict[str, int] = {}
    for pool in POOLS:
        counts[pool] = len(members[pool])
        centroids[pool] = np.mean(members[pool], axis=0) if members[pool] else None
    model = PoolModel(alpha=float(alpha), beta=float(beta), D=ts.D,
                      assignments=assignments, centroids=centroids, counts=counts)
    model.validate()
    return model


def save_pools(model: PoolModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2, allow_nan=False) + "\n",
                          encoding="utf-8")


def load_pools(path: str | Path) -> PoolModel:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CartographyError(f"{path}: malformed JSON: {exc}") from exc
    return PoolModel.from_dict(obj)
