"""Extractor run configuration.

The config document is the cost-free subset of the tierroute run-config
schema (version, traces, out, seed) plus an `extractor` section describing
the backbone, dataset, exit layers, and the training grid.  Unknown keys are
a hard error.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping


class ExtractorError(ValueError):
    """Invalid extractor configuration or run."""


_TOP_KEYS = {"version", "traces", "out", "seed", "extractor"}
_EXTRACTOR_KEYS = {"backbone", "dataset", "split_fractions", "m", "n", "l",
                   "epochs", "batch_sizes", "learning_rates", "d_model",
                   "num_heads", "dropout", "max_samples", "checkpoint_out", "note"}

CONFIG_VERSION = 1


@dataclass
class ExtractorConfig:
    traces: Path
    seed: int = 0
    backbone: str = "tiny-encoder"
    dataset: str = "sklearn-digits"
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    m: int = 1
    n: int = 2
    l: int = 4
    epochs: int = 5
    batch_sizes: tuple[int, ...] = (16,)
    learning_rates: tuple[float, ...] = (1e-3, 3e-3)
    d_model: int = 32
    num_heads: int = 4
    dropout: float = 0.1
    max_samples: int | None = None
    checkpoint_out: Path | None = None
    note: str = ""

    def validate(self) -> None:
        if not 1 <= self.m <= self.n <= self.l:
            raise ExtractorError(f"exit layers must satisfy 1 <= m <= n <= l, "
                                 f"got m={self.m}, n={self.n}, l={self.l}")
        if self.epochs < 1:
            raise ExtractorError(f"epochs must be >= 1, got {self.epochs}")
        if len(self.split_fractions) != 3 or any(f <= 0 for f in self.split_fractions):
            raise ExtractorError("split_fractions must be three positive numbers")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ExtractorError(f"split_fractions must sum to 1, "
                                 f"got {sum(self.split_fractions)!r}")
        if not self.batch_sizes or any(b < 1 for b in self.batch_sizes):
            raise ExtractorError("batch_sizes must be a non-empty list of positive ints")
        if not self.learning_rates or any(lr <= 0 for lr in self.learning_rates):
            raise ExtractorError("learning_rates must be a non-empty list of positive reals")
        if self.d_model % self.num_heads != 0:
            raise ExtractorError("d_model must be divisible by num_heads")
        if self.max_samples is not None and self.max_samples < 30:
            raise ExtractorError("max_samples must be at least 30 to split three ways")


def _check_keys(obj: Mapping, allowed: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ExtractorError(f"{where} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ExtractorError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str | Path) -> ExtractorConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ExtractorError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ExtractorError(f"{path}: malformed JSON: {exc}") from exc
    _check_keys(obj, _TOP_KEYS, "config")
    if obj.get("version") != CONFIG_VERSION:
        raise ExtractorError(f"config version must be {CONFIG_VERSION}, "
                             f"got {obj.get('version')!r}")
    if not obj.get("traces"):
        raise ExtractorError("config.traces must name the output trace file")
    ex = obj.get("extractor", {})
    _check_keys(ex, _EXTRACTOR_KEYS, "extractor")
    cfg = ExtractorConfig(
        traces=Path(obj["traces"]),
        seed=obj.get("seed", 0),
        backbone=ex.get("backbone", "tiny-encoder"),
        dataset=ex.get("dataset", "sklearn-digits"),
        split_fractions=tuple(ex.get("split_fractions", (0.8, 0.1, 0.1))),
        m=ex.get("m", 1), n=ex.get("n", 2), l=ex.get("l", 4),
        epochs=ex.get("epochs", 5),
        batch_sizes=tuple(ex.get("batch_sizes", (32,))),
        learning_rates=tuple(ex.get("learning_rates", (1e-3,))),
        d_model=ex.get("d_model", 32),
        num_heads=ex.get("num_heads", 4),
        dropout=ex.get("dropout", 0.1),
        max_samples=ex.get("max_samples"),
        checkpoint_out=Path(ex["checkpoint_out"]) if ex.get("checkpoint_out") else None,
        note=ex.get("note", ""),
    )
    cfg.validate()
    return cfg
