"""Run configuration: one versioned JSON document per experiment.

Unknown keys anywhere in the document are a hard error, so typos never pass
silently.  Command-line flags may override the scalar fields (flag wins over
config, config wins over defaults).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .costs import CostParams, ThresholdGrid
from .harness import POLICY_NAMES, SWEEPABLE, Policy
from .synthetic import ARCHETYPES, ArchetypeSpec, DriftSpec, SyntheticSpec
from .traces import SPLITS, TIERS

CONFIG_VERSION = 1

_TOP_KEYS = {"version", "traces", "out", "seed", "policies", "mode", "baseline",
             "costs", "grid", "synthetic", "sweep", "pools"}
_COST_KEYS = {"lambda_unit", "lambda_m", "lambda_e", "o_e", "o_c", "gamma", "m", "n", "l"}
_GRID_KEYS = {"alpha", "beta"}
_SWEEP_KEYS = {"vary", "values"}
_SYNTH_KEYS = {"D", "E", "num_classes", "seed", "archetypes", "weights", "counts",
               "drift", "conf_correct_range", "conf_incorrect_range", "note"}
_ARCH_KEYS = {"centroid", "spread", "base_confidence", "epoch_noise", "tier_correct_probs"}
_DRIFT_KEYS = {"shift", "start_index"}


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


def _check_keys(obj: Mapping, allowed: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def costs_from_dict(obj: Mapping) -> CostParams:
    _check_keys(obj, _COST_KEYS, "costs")
    try:
        return CostParams(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"costs: {exc}") from exc


def grid_from_dict(obj: Mapping) -> ThresholdGrid:
    _check_keys(obj, _GRID_KEYS, "grid")
    try:
        return ThresholdGrid(alphas=tuple(obj.get("alpha", ThresholdGrid().alphas)),
                             betas=tuple(obj.get("beta", ThresholdGrid().betas)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}") from exc


def synthetic_from_dict(obj: Mapping) -> SyntheticSpec:
    _check_keys(obj, _SYNTH_KEYS, "synthetic")
    for key in ("D", "E", "num_classes", "seed", "archetypes", "weights", "counts"):
        if key not in obj:
            raise ConfigError(f"synthetic: missing key {key!r}")
    archetypes: dict[str, ArchetypeSpec] = {}
    arch_obj = obj["archetypes"]
    _check_keys(arch_obj, set(ARCHETYPES), "synthetic.archetypes")
    for name in ARCHETYPES:
        if name not in arch_obj:
            raise ConfigError(f"synthetic.archetypes: missing archetype {name!r}")
        a = arch_obj[name]
        _check_keys(a, _ARCH_KEYS, f"synthetic.archetypes.{name}")
        try:
            archetypes[name] = ArchetypeSpec(
                centroid=tuple(a["centroid"]), spread=a["spread"],
                base_confidence=a["base_confidence"], epoch_noise=a["epoch_noise"],
                tier_correct_probs={t: a["tier_correct_probs"][t] for t in TIERS},
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"synthetic.archetypes.{name}: {exc}") from exc
    drift = None
    if obj.get("drift") is not None:
        d = obj["drift"]
        _check_keys(d, _DRIFT_KEYS, "synthetic.drift")
        drift = DriftSpec(shift=tuple(d["shift"]), start_index=d["start_index"])
    kwargs: dict[str, Any] = {}
    if obj.get("conf_correct_range") is not None:
        kwargs["conf_correct_range"] = tuple(obj["conf_correct_range"])
    if obj.get("conf_incorrect_range") is not None:
        kwargs["conf_incorrect_range"] = tuple(obj["conf_incorrect_range"])
    if obj.get("note") is not None:
        kwargs["note"] = obj["note"]
    spec = SyntheticSpec(D=obj["D"], E=obj["E"], num_classes=obj["num_classes"],
                         archetypes=archetypes, weights=tuple(obj["weights"]),
                         counts=dict(obj["counts"]), seed=obj["seed"], drift=drift,
                         **kwargs)
    spec.validate()
    return spec


@dataclass
class RunConfig:
    """Parsed configuration plus the derived parameter objects."""

    traces: Path | None
    out: Path
    seed: int
    policies: list[Policy]
    mode: str
    baseline: str
    costs: CostParams
    grid: ThresholdGrid
    synthetic: SyntheticSpec | None
    sweep_vary: str | None
    sweep_values: list[float] | None
    pools: Path | None


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc
    _check_keys(obj, _TOP_KEYS, "config")
    if obj.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}, got {obj.get('version')!r}")
    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    mode = obj.get("mode", "adaptive")
    if mode not in ("fixed", "adaptive"):
        raise ConfigError(f"mode must be 'fixed' or 'adaptive', got {mode!r}")
    baseline = obj.get("baseline", "cloud_only")
    if baseline not in ("cloud_only", "edge_only", "mobile_only"):
        raise ConfigError(f"baseline must be a single-tier policy, got {baseline!r}")
    names = obj.get("policies", ["cartography_adaptive", "cloud_only"])
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ConfigError("policies must be a list of policy names")
    policies = [_policy_from_name(n, seed) for n in names]
    sweep_vary = None
    sweep_values = None
    if obj.get("sweep") is not None:
        s = obj["sweep"]
        _check_keys(s, _SWEEP_KEYS, "sweep")
        sweep_vary = s.get("vary")
        if sweep_vary is not None and sweep_vary not in SWEEPABLE:
            raise ConfigError(f"sweep.vary must be one of {SWEEPABLE}, got {sweep_vary!r}")
        if s.get("values") is not None:
            sweep_values = [float(v) for v in s["values"]]
    return RunConfig(
        traces=Path(obj["traces"]) if obj.get("traces") else None,
        out=Path(obj.get("out", "artifacts")),
        seed=seed,
        policies=policies,
        mode=mode,
        baseline=baseline,
        costs=costs_from_dict(obj.get("costs", {})),
        grid=grid_from_dict(obj.get("grid", {})),
        synthetic=synthetic_from_dict(obj["synthetic"]) if obj.get("synthetic") else None,
        sweep_vary=sweep_vary,
        sweep_values=sweep_values,
        pools=Path(obj["pools"]) if obj.get("pools") else None,
    )


def _policy_from_name(name: str, seed: int) -> Policy:
    if name not in POLICY_NAMES:
        raise ConfigError(f"unknown policy {name!r} (expected one of {POLICY_NAMES})")
    return Policy(name, seed=seed if name == "random_uniform" else None)


def apply_overrides(cfg: RunConfig, *, out: str | None = None, seed: int | None = None,
                    policies: list[str] | None = None, mode: str | None = None,
                    vary: str | None = None, values: list[float] | None = None) -> RunConfig:
    """Flag-over-config precedence for the scalar fields."""
    if seed is not None:
        cfg.seed = seed
        cfg.policies = [_policy_from_name(p.name, seed) for p in cfg.policies]
    if out is not None:
        cfg.out = Path(out)
    if policies:
        cfg.policies = [_policy_from_name(n, cfg.seed) for n in policies]
    if mode is not None:
        if mode not in ("fixed", "adaptive"):
            raise ConfigError(f"mode must be 'fixed' or 'adaptive', got {mode!r}")
        cfg.mode = mode
    if vary is not None:
        if vary not in SWEEPABLE:
            raise ConfigError(f"--vary must be one of {SWEEPABLE}, got {vary!r}")
        cfg.sweep_vary = vary
    if values is not None:
        cfg.sweep_values = values
    return cfg
