"""The default desk-scale benchmark.

Three well-separated archetype blobs in an 8-dimensional embedding space,
with training-dynamics processes that place them in the classic map regions:
easy (high confidence), medium (high variance), hard (low confidence).  The
easy and hard blobs straddle the threshold grids on one axis each, so tuning
has real borderline mass to trade off when costs change.

Correctness profile: easy samples are correct everywhere (p=0.98), medium
samples are correct at edge and cloud (p=0.95), hard samples are correct at
cloud (p=0.9).

The benchmark cost structure keeps the standard processing/offload multiples
but prices the cloud platform charge at 21x lambda: a paid full-model
endpoint is far costlier per sample than local inference, which is what makes
routing worthwhile in the first place.  The library-wide CostParams defaults
(gamma = 6x) are unchanged.
"""
from __future__ import annotations

from .costs import CostParams
from .synthetic import ArchetypeSpec, DriftSpec, SyntheticSpec

EMBED_DIM = 8
EPOCHS = 5
NUM_CLASSES = 4

_EASY_CENTER = (5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
_MEDIUM_CENTER = (0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
_HARD_CENTER = (-5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

# Common displacement of every blob after the change point: a bit more than
# half the inter-centroid gap, enough to misroute a frozen-centroid router on
# a fair share of samples while a tracking router can follow.
DRIFT_SHIFT = (4.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
DRIFT_START = 1000


def benchmark_archetypes() -> dict[str, ArchetypeSpec]:
    return {
        "easy": ArchetypeSpec(
            centroid=_EASY_CENTER, spread=1.0,
            base_confidence=0.90, epoch_noise=0.28,
            tier_correct_probs={"mobile": 0.98, "edge": 0.98, "cloud": 0.98},
        ),
        "medium": ArchetypeSpec(
            centroid=_MEDIUM_CENTER, spread=1.0,
            base_confidence=0.78, epoch_noise=0.35,
            tier_correct_probs={"mobile": 0.55, "edge": 0.95, "cloud": 0.95},
        ),
        "hard": ArchetypeSpec(
            centroid=_HARD_CENTER, spread=1.0,
            base_confidence=0.45, epoch_noise=0.25,
            tier_correct_probs={"mobile": 0.30, "edge": 0.55, "cloud": 0.90},
        ),
    }


def benchmark_spec(seed: int = 0, *, validation: int = 1000, test: int = 3000,
                   train: int = 0, drift: bool = False) -> SyntheticSpec:
    """Balanced three-archetype benchmark; optionally with the step drift."""
    return SyntheticSpec(
        D=EMBED_DIM, E=EPOCHS, num_classes=NUM_CLASSES,
        archetypes=benchmark_archetypes(),
        weights=(1 / 3, 1 / 3, 1 / 3),
        counts={"train": train, "validation": validation, "test": test},
        seed=seed,
        drift=DriftSpec(shift=DRIFT_SHIFT, start_index=DRIFT_START) if drift else None,
        note="benchmark" + ("+drift" if drift else ""),
    )


def benchmark_costs(lambda_unit: float = 0.01) -> CostParams:
    """Benchmark cost structure: default multiples, cloud charge 21x lambda."""
    return CostParams(lambda_unit=lambda_unit, gamma=21.0 * lambda_unit)
