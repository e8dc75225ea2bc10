"""Writing and checking the tierroute trace file format.

This is a deliberately self-contained implementation of the published
JSON-Lines contract (header line + one record object per line), so the
extractor can hand its files to the routing toolchain without importing it.
The checker enforces the same rules the consumer applies: consistent D and
E, probabilities in [0, 1], complete tier maps, unique ids, and per-epoch
probabilities on every validation record.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Mapping

from .config import ExtractorError

FILE_KIND = "tierroute-traces"
FILE_VERSION = 1
TIERS = ("mobile", "edge", "cloud")
SPLITS = ("train", "validation", "test")


def make_header(D: int, E: int, num_classes: int, seed: int | None, note: str) -> dict:
    return {"kind": FILE_KIND, "version": FILE_VERSION, "D": int(D), "E": int(E),
            "num_classes": int(num_classes), "seed": seed, "note": note}


def make_record(rec_id: str, split: str, embedding, epoch_true_probs,
                tier_conf: Mapping[str, float], tier_correct: Mapping[str, bool],
                label: int) -> dict:
    return {
        "id": rec_id,
        "split": split,
        "embedding": [float(v) for v in embedding],
        "epoch_true_probs": (None if epoch_true_probs is None
                             else [float(p) for p in epoch_true_probs]),
        "tier_conf": {t: float(tier_conf[t]) for t in TIERS},
        "tier_correct": {t: bool(tier_correct[t]) for t in TIERS},
        "label": int(label),
    }


def write_trace_file(path: str | Path, header: dict, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, separators=(",", ":"), allow_nan=False) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":"), allow_nan=False) + "\n")


def _probe(value, what: str, ctx: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ExtractorError(f"{ctx}: {what} must be a number")
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ExtractorError(f"{ctx}: {what} out of range: {value!r}")
    return float(value)


def check_trace_file(path: str | Path) -> dict:
    """Validate a written file against the format contract; returns the header."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ExtractorError(f"{path}: empty trace file")
    header = json.loads(lines[0])
    if header.get("kind") != FILE_KIND or header.get("version") != FILE_VERSION:
        raise ExtractorError(f"{path}: bad header kind/version")
    D, E = header["D"], header["E"]
    num_classes = header["num_classes"]
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        ctx = f"{path}:{lineno}"
        rec = json.loads(line)
        if rec["id"] in seen:
            raise ExtractorError(f"{ctx}: duplicate id {rec['id']!r}")
        seen.add(rec["id"])
        if rec["split"] not in SPLITS:
            raise ExtractorError(f"{ctx}: bad split {rec['split']!r}")
        if len(rec["embedding"]) != D:
            raise ExtractorError(f"{ctx}: embedding length {len(rec['embedding'])} != D={D}")
        if any(not math.isfinite(v) for v in rec["embedding"]):
            raise ExtractorError(f"{ctx}: non-finite embedding value")
        probs = rec["epoch_true_probs"]
        if probs is None:
            if rec["split"] == "validation":
                raise ExtractorError(f"{ctx}: validation record lacks epoch_true_probs")
        else:
            if len(probs) != E:
                raise ExtractorError(f"{ctx}: {len(probs)} epoch probs != E={E}")
            for p in probs:
                _probe(p, "epoch probability", ctx)
        for t in TIERS:
            _probe(rec["tier_conf"][t], f"tier_conf.{t}", ctx)
            if not isinstance(rec["tier_correct"][t], bool):
                raise ExtractorError(f"{ctx}: tier_correct.{t} must be boolean")
        if not isinstance(rec["label"], int) or not 0 <= rec["label"] < num_classes:
            raise ExtractorError(f"{ctx}: label {rec['label']!r} outside [0, {num_classes})")
    return header
