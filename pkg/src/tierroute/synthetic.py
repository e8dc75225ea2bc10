"""Seeded synthetic trace generation.

Samples are drawn from three archetypes (easy / medium / hard), each an
isotropic Gaussian blob in embedding space with its own training-dynamics
process and per-tier correctness profile.  Generation is a pure function of
the spec, seed included: records are drawn split by split in the fixed order
train, validation, test, with a fixed per-record draw order, so two calls
with equal specs yield identical trace sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .traces import SPLITS, TIERS, SampleTrace, TraceError, TraceSet

ARCHETYPES = ("easy", "medium", "hard")


@dataclass(frozen=True)
class ArchetypeSpec:
    """One mixture component: embedding blob plus outcome probabilities."""

    centroid: tuple[float, ...]
    spread: float
    base_confidence: float
    epoch_noise: float
    tier_correct_probs: Mapping[str, float]

    def validate(self, D: int, name: str) -> None:
        if len(self.centroid) != D:
            raise TraceError(f"archetype {name}: centroid length {len(self.centroid)} != D={D}")
        if not all(math.isfinite(float(v)) for v in self.centroid):
            raise TraceError(f"archetype {name}: centroid must be finite")
        if not (math.isfinite(self.spread) and self.spread > 0):
            raise TraceError(f"archetype {name}: spread must be > 0")
        if not 0.0 <= self.base_confidence <= 1.0:
            raise TraceError(f"archetype {name}: base_confidence must lie in [0,1]")
        if not (math.isfinite(self.epoch_noise) and self.epoch_noise >= 0):
            raise TraceError(f"archetype {name}: epoch_noise must be >= 0")
        if set(self.tier_correct_probs) != set(TIERS):
            raise TraceError(f"archetype {name}: tier_correct_probs needs keys {TIERS}")
        for tier, p in self.tier_correct_probs.items():
            if not 0.0 <= float(p) <= 1.0:
                raise TraceError(f"archetype {name}: correctness probability {tier}={p} outside [0,1]")


@dataclass(frozen=True)
class DriftSpec:
    """Shift applied to all archetype centroids for test records with
    stream index >= start_index."""

    shift: tuple[float, ...]
    start_index: int

    def validate(self, D: int) -> None:
        if len(self.shift) != D:
            raise TraceError(f"drift shift length {len(self.shift)} != D={D}")
        if not all(math.isfinite(float(v)) for v in self.shift):
            raise TraceError("drift shift must be finite")
        if isinstance(self.start_index, bool) or not isinstance(self.start_index, int) or self.start_index < 0:
            raise TraceError(f"drift start_index must be a non-negative integer, got {self.start_index!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Full recipe for a synthetic trace set."""

    D: int
    E: int
    num_classes: int
    archetypes: Mapping[str, ArchetypeSpec]
    weights: tuple[float, float, float]
    counts: Mapping[str, int]
    seed: int
    drift: DriftSpec | None = None
    conf_correct_range: tuple[float, float] = (0.7, 1.0)
    conf_incorrect_range: tuple[float, float] | None = None
    note: str = "synthetic"

    def validate(self) -> None:
        if isinstance(self.D, bool) or not isinstance(self.D, int) or self.D < 1:
            raise TraceError(f"D must be a positive integer, got {self.D!r}")
        if isinstance(self.E, bool) or not isinstance(self.E, int) or self.E < 1:
            raise TraceError(f"E must be a positive integer, got {self.E!r}")
        if isinstance(self.num_classes, bool) or not isinstance(self.num_classes, int) or self.num_classes < 2:
            raise TraceError(f"num_classes must be >= 2, got {self.num_classes!r}")
        if set(self.archetypes) != set(ARCHETYPES):
            raise TraceError(f"archetypes must have exactly the keys {ARCHETYPES}")
        for name in ARCHETYPES:
            self.archetypes[name].validate(self.D, name)
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise TraceError("weights must be three non-negative reals")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise TraceError(f"weights must sum to 1, got {sum(self.weights)!r}")
        if set(self.counts) - set(SPLITS):
            raise TraceError(f"counts keys must be a subset of {SPLITS}")
        for split, n in self.counts.items():
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise TraceError(f"counts.{split} must be a non-negative integer, got {n!r}")
        if self.drift is not None:
            self.drift.validate(self.D)
        lo, hi = self.conf_correct_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise TraceError(f"conf_correct_range {self.conf_correct_range} invalid")
        if self.conf_incorrect_range is not None:
            lo, hi = self.conf_incorrect_range
            if not 0.0 <= lo <= hi <= 1.0:
                raise TraceError(f"conf_incorrect_range {self.conf_incorrect_range} invalid")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise TraceError(f"seed must be an integer, got {self.seed!r}")


def _incorrect_range(spec: SyntheticSpec) -> tuple[float, float]:
    if spec.conf_incorrect_range is not None:
        return spec.conf_incorrect_range
    return (1.0 / spec.num_classes, 0.7)


def _draw_record(rng: np.random.Generator, spec: SyntheticSpec, arch: ArchetypeSpec,
                 rec_id: str, split: str, with_probs: bool) -> SampleTrace:
    center = np.asarray(arch.centroid, dtype=float)
    embedding = center + arch.spread * rng.standard_normal(spec.D)
    probs = None
    if with_probs:
        noise = arch.epoch_noise * rng.standard_normal(spec.E)
        probs = np.clip(arch.base_confidence + noise, 0.0, 1.0)
    label = int(rng.integers(spec.num_classes))
    # One shared uniform per record: a sample correct under a weaker tier is
    # correct under every stronger one (marginals stay exactly per-tier).
    u = float(rng.uniform())
    correct = {t: bool(u < float(arch.tier_correct_probs[t])) for t in TIERS}
    lo_c, hi_c = spec.conf_correct_range
    lo_i, hi_i = _incorrect_range(spec)
    conf = {}
    for tier in TIERS:
        lo, hi = (lo_c, hi_c) if correct[tier] else (lo_i, hi_i)
        conf[tier] = float(rng.uniform(lo, hi))
    return SampleTrace(id=rec_id, split=split, embedding=embedding,
                       epoch_true_probs=probs, tier_conf=conf,
                       tier_correct=correct, label=label)


def generate_with_counts(spec: SyntheticSpec) -> tuple[TraceSet, dict[str, dict[str, int]]]:
    """Generate a trace set and report per-split archetype draw counts."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    ts = TraceSet(D=spec.D, E=spec.E, num_classes=spec.num_classes,
                  seed=spec.seed, note=spec.note)
    weights = np.asarray(spec.weights, dtype=float)
    counts: dict[str, dict[str, int]] = {s: {a: 0 for a in ARCHETYPES} for s in SPLITS}
    for split in SPLITS:
        n = int(spec.counts.get(split, 0))
        for i in range(n):
            arch_idx = int(rng.choice(3, p=weights))
            arch_name = ARCHETYPES[arch_idx]
            arch = spec.archetypes[arch_name]
            rec = _draw_record(rng, spec, arch, rec_id=f"{split}-{i:05d}",
                               split=split, with_probs=(split == "validation"))
            if (spec.drift is not None and split == "test"
                    and i >= spec.drift.start_index):
                rec.embedding = rec.embedding + np.asarray(spec.drift.shift, dtype=float)
            counts[split][arch_name] += 1
            ts.records.append(rec)
    ts.validate()
    return ts, counts


def generate_synthetic(spec: SyntheticSpec) -> TraceSet:
    """Deterministically generate a trace set from a synthetic spec."""
    ts, _ = generate_with_counts(spec)
    return ts
