"""Sample traces: data model plus the JSON-Lines trace file format.

A trace file is UTF-8 JSON Lines: line 1 is a header object, every following
line is one sample record.  Serialization is deterministic (fixed key order,
shortest round-trip float repr), so writing the same set twice produces
byte-identical files and ``read_traces(write_traces(s)) == s`` field for field.

Trace sets are immutable after construction and safe to share read-only
across threads; reading and writing are single-threaded.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

SPLITS = ("train", "validation", "test")
TIERS = ("mobile", "edge", "cloud")

FILE_KIND = "tierroute-traces"
FILE_VERSION = 1

_HEADER_KEYS = ("kind", "version", "D", "E", "num_classes", "seed", "note")
_RECORD_KEYS = ("id", "split", "embedding", "epoch_true_probs", "tier_conf",
                "tier_correct", "label")


class TraceError(ValueError):
    """A trace set or trace file violates the format contract."""


def _fail(ctx: str, msg: str) -> None:
    raise TraceError(f"{ctx}: {msg}" if ctx else msg)


def _check_prob(value: object, what: str, ctx: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(ctx, f"{what} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        _fail(ctx, f"{what} is not finite")
    if not 0.0 <= v <= 1.0:
        _fail(ctx, f"probability out of range: {what} = {v!r}")
    return v


def _check_vector(value: object, what: str, ctx: str) -> np.ndarray:
    if isinstance(value, np.ndarray):
        arr = np.asarray(value, dtype=float)
    elif isinstance(value, (list, tuple)):
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _fail(ctx, f"{what} must contain numbers, got {v!r}")
        arr = np.asarray(value, dtype=float)
    else:
        _fail(ctx, f"{what} must be an array, got {type(value).__name__}")
    if arr.ndim != 1:
        _fail(ctx, f"{what} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        _fail(ctx, f"{what} contains non-finite values")
    return arr


@dataclass(eq=False)
class SampleTrace:
    """One sample: embedding, per-epoch true-label probabilities, per-tier
    confidence and correctness, and the class label."""

    id: str
    split: str
    embedding: np.ndarray
    epoch_true_probs: np.ndarray | None
    tier_conf: dict[str, float]
    tier_correct: dict[str, bool]
    label: int

    def validate(self, D: int, E: int, num_classes: int, ctx: str = "") -> None:
        if not isinstance(self.id, str) or not self.id:
            _fail(ctx, "id must be a non-empty string")
        if self.split not in SPLITS:
            _fail(ctx, f"unknown split {self.split!r} (expected one of {SPLITS})")
        emb = _check_vector(self.embedding, "embedding", ctx)
        if emb.shape[0] != D:
            _fail(ctx, f"embedding dimension mismatch: got {emb.shape[0]}, header D={D}")
        if self.epoch_true_probs is None:
            if self.split == "validation":
                _fail(ctx, "validation record missing epoch_true_probs")
        else:
            probs = _check_vector(self.epoch_true_probs, "epoch_true_probs", ctx)
            if probs.shape[0] != E:
                _fail(ctx, f"epoch count mismatch: got {probs.shape[0]}, header E={E}")
            for p in probs:
                _check_prob(float(p), "epoch_true_probs entry", ctx)
        for mapping, what in ((self.tier_conf, "tier_conf"), (self.tier_correct, "tier_correct")):
            if not isinstance(mapping, dict) or tuple(sorted(mapping)) != tuple(sorted(TIERS)):
                _fail(ctx, f"{what} must have exactly the keys {TIERS}")
        for tier in TIERS:
            _check_prob(self.tier_conf[tier], f"tier_conf.{tier}", ctx)
            if not isinstance(self.tier_correct[tier], bool):
                _fail(ctx, f"tier_correct.{tier} must be a boolean")
        if isinstance(self.label, bool) or not isinstance(self.label, int):
            _fail(ctx, f"label must be an integer, got {self.label!r}")
        if not 0 <= self.label < num_classes:
            _fail(ctx, f"label {self.label} outside [0, {num_classes})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleTrace):
            return NotImplemented
        if self.epoch_true_probs is None or other.epoch_true_probs is None:
            probs_equal = self.epoch_true_probs is None and other.epoch_true_probs is None
        else:
            probs_equal = np.array_equal(self.epoch_true_probs, other.epoch_true_probs)
        return (self.id == other.id and self.split == other.split
                and np.array_equal(self.embedding, other.embedding)
                and probs_equal
                and self.tier_conf == other.tier_conf
                and self.tier_correct == other.tier_correct
                and self.label == other.label)


@dataclass(eq=False)
class TraceSet:
    """A trace header plus its ordered records."""

    D: int
    E: int
    num_classes: int
    seed: int | None
    note: str
    records: list[SampleTrace] = field(default_factory=list)

    def validate(self) -> None:
        if not isinstance(self.D, int) or isinstance(self.D, bool) or self.D < 1:
            raise TraceError(f"header D must be a positive integer, got {self.D!r}")
        if not isinstance(self.E, int) or isinstance(self.E, bool) or self.E < 0:
            raise TraceError(f"header E must be a non-negative integer, got {self.E!r}")
        if not isinstance(self.num_classes, int) or isinstance(self.num_classes, bool) or self.num_classes < 1:
            raise TraceError(f"header num_classes must be a positive integer, got {self.num_classes!r}")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int)):
            raise TraceError(f"header seed must be an integer or null, got {self.seed!r}")
        if not isinstance(self.note, str):
            raise TraceError("header note must be a string")
        seen: set[str] = set()
        for i, rec in enumerate(self.records):
            rec.validate(self.D, self.E, self.num_classes, ctx=f"record {i}")
            if rec.id in seen:
                raise TraceError(f"record {i}: duplicate id {rec.id!r}")
            seen.add(rec.id)

    def split(self, name: str) -> list[SampleTrace]:
        if name not in SPLITS:
            raise TraceError(f"unknown split {name!r}")
        return [r for r in self.records if r.split == name]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SampleTrace]:
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraceSet):
            return NotImplemented
        return (self.D == other.D and self.E == other.E
                and self.num_classes == other.num_classes
                and self.seed == other.seed and self.note == other.note
                and self.records == other.records)


def _header_dict(ts: TraceSet) -> dict:
    return {"kind": FILE_KIND, "version": FILE_VERSION, "D": ts.D, "E": ts.E,
            "num_classes": ts.num_classes, "seed": ts.seed, "note": ts.note}


def _record_dict(rec: SampleTrace) -> dict:
    probs = None if rec.epoch_true_probs is None else [float(p) for p in rec.epoch_true_probs]
    return {
        "id": rec.id,
        "split": rec.split,
        "embedding": [float(v) for v in rec.embedding],
        "epoch_true_probs": probs,
        "tier_conf": {t: float(rec.tier_conf[t]) for t in TIERS},
        "tier_correct": {t: bool(rec.tier_correct[t]) for t in TIERS},
        "label": int(rec.label),
    }


def write_traces(ts: TraceSet, path: str | Path) -> None:
    """Write a validated trace set; output bytes depend only on the set."""
    ts.validate()
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_header_dict(ts), separators=(",", ":"), allow_nan=False))
        fh.write("\n")
        for rec in ts.records:
            fh.write(json.dumps(_record_dict(rec), separators=(",", ":"), allow_nan=False))
            fh.write("\n")


def _parse_header(obj: object, ctx: str) -> TraceSet:
    if not isinstance(obj, dict):
        _fail(ctx, "header must be a JSON object")
    unknown = set(obj) - set(_HEADER_KEYS)
    if unknown:
        _fail(ctx, f"unknown header keys: {sorted(unknown)}")
    missing = set(_HEADER_KEYS) - set(obj)
    if missing:
        _fail(ctx, f"missing header keys: {sorted(missing)}")
    if obj["kind"] != FILE_KIND:
        _fail(ctx, f"not a trace file (kind={obj['kind']!r})")
    if obj["version"] != FILE_VERSION:
        _fail(ctx, f"unsupported version {obj['version']!r}")
    ts = TraceSet(D=obj["D"], E=obj["E"], num_classes=obj["num_classes"],
                  seed=obj["seed"], note=obj["note"])
    ts.validate()
    return ts


def _parse_record(obj: object, ctx: str) -> SampleTrace:
    if not isinstance(obj, dict):
        _fail(ctx, "record must be a JSON object")
    unknown = set(obj) - set(_RECORD_KEYS)
    if unknown:
        _fail(ctx, f"unknown record keys: {sorted(unknown)}")
    missing = set(_RECORD_KEYS) - set(obj)
    if missing:
        _fail(ctx, f"missing record keys: {sorted(missing)}")
    probs = obj["epoch_true_probs"]
    if probs is not None:
        probs = _check_vector(probs, "epoch_true_probs", ctx)
    conf = obj["tier_conf"]
    correct = obj["tier_correct"]
    if not isinstance(conf, dict) or not isinstance(correct, dict):
        _fail(ctx, "tier_conf and tier_correct must be objects")
    return SampleTrace(
        id=obj["id"], split=obj["split"],
        embedding=_check_vector(obj["embedding"], "embedding", ctx),
        epoch_true_probs=probs,
        tier_conf={t: conf[t] for t in TIERS} if set(conf) == set(TIERS) else conf,
        tier_correct={t: correct[t] for t in TIERS} if set(correct) == set(TIERS) else correct,
        label=obj["label"],
    )


def read_traces(path: str | Path) -> TraceSet:
    """Read and validate a trace file; errors carry 1-based line numbers."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TraceError(f"{path}: empty file, expected a header line")
    try:
        header_obj = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceError(f"line 1: malformed JSON: {exc}") from exc
    ts = _parse_header(header_obj, "line 1")
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        ctx = f"line {lineno}"
        if not line.strip():
            _fail(ctx, "malformed record: blank line")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"{ctx}: malformed JSON: {exc}") from exc
        rec = _parse_record(obj, ctx)
        rec.validate(ts.D, ts.E, ts.num_classes, ctx=ctx)
        if rec.id in seen:
            _fail(ctx, f"duplicate id {rec.id!r}")
        seen.add(rec.id)
        ts.records.append(rec)
    return ts
