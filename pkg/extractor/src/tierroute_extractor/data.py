"""Dataset registry and the seeded three-way split.

Each dataset is returned as (X, y, num_classes) where X has shape
(N, seq_len, features): every sample is a short token sequence the encoder
can attend over.  The split is a pure function of (dataset order, seed,
fractions), so re-running a config reproduces the exact same assignment.
"""
from __future__ import annotations

import numpy as np

from .config import ExtractorError

DATASETS = ("sklearn-digits",)


def load_dataset(name: str, max_samples: int | None = None,
                 seed: int = 0) -> tuple[np.ndarray, np.ndarray, int]:
    if name == "sklearn-digits":
        from sklearn.datasets import load_digits

        digits = load_digits()
        X = digits.images.astype(np.float32) / 16.0  # rows as an 8-token sequence
        y = digits.target.astype(np.int64)
    else:
        raise ExtractorError(f"unknown dataset {name!r} (available: {DATASETS})")
    if max_samples is not None and max_samples < len(X):
        keep = np.random.default_rng(seed).permutation(len(X))[:max_samples]
        keep.sort()
        X, y = X[keep], y[keep]
    return X, y, int(y.max()) + 1


def split_indices(n: int, fractions: tuple[float, float, float],
                  seed: int) -> dict[str, np.ndarray]:
    """Deterministic shuffled split into train/validation/test index arrays."""
    if n < 3:
        raise ExtractorError(f"need at least 3 samples to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    n_train = min(n_train, n - 2)
    n_val = max(1, min(n_val, n - n_train - 1))
    return {
        "train": np.sort(perm[:n_train]),
        "validation": np.sort(perm[n_train:n_train + n_val]),
        "test": np.sort(perm[n_train + n_val:]),
    }
