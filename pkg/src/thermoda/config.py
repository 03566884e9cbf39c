"""JSON experiment configs: parsing, validation, and defaults.

A config file has up to six sections: "experiment", "pretrain", "finetune",
"scratch", "source", "target". Unknown keys anywhere are rejected so typos
fail loudly instead of silently falling back to a default. Durations are
either integer seconds or strings like "15min", "1h", "900s".
"""
from __future__ import annotations

import json
import os
import re

from .errors import ConfigError
from .model import ForcingMode
from .optim import TrainConfig
from .pipeline import DatasetSpec, ExperimentSpec
from .synth import SynthConfig

DEFAULT_OUT = "thermoda-out"
OUT_ENV_VAR = "THERMODA_OUT"

_DURATION_RE = re.compile(r"^\s*(\d+)\s*([a-z]*)\s*$")
_DURATION_UNITS = {
    "": 1, "s": 1, "sec": 1, "secs": 1, "second": 1, "seconds": 1,
    "min": 60, "mins": 60, "minute": 60, "minutes": 60,
    "h": 3600, "hr": 3600, "hour": 3600, "hours": 3600,
    "d": 86400, "day": 86400, "days": 86400,
}

_PHASE_DEFAULT_EPOCHS = {"pretrain": 15, "finetune": 30, "scratch": 30}


def parse_duration(value) -> int:
    """Seconds from an int or a '<number><unit>' string."""
    if isinstance(value, bool):
        raise ConfigError(f"not a duration: {value!r}")
    if isinstance(value, int):
        seconds = value
    elif isinstance(value, str):
        m = _DURATION_RE.match(value.lower())
        if not m or m.group(2) not in _DURATION_UNITS:
            raise ConfigError(f"unparseable duration {value!r}")
        seconds = int(m.group(1)) * _DURATION_UNITS[m.group(2)]
    else:
        raise ConfigError(f"not a duration: {value!r}")
    if seconds < 1:
        raise ConfigError(f"duration must be at least 1 second, got {value!r}")
    return seconds


def _require_mapping(cfg, key, default=None):
    section = cfg.get(key, default)
    if section is None:
        raise ConfigError(f"config is missing the '{key}' section")
    if not isinstance(section, dict):
        raise ConfigError(f"config section '{key}' must be an object")
    return section


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    _reject_unknown(cfg, ("experiment", "pretrain", "finetune", "scratch",
                          "source", "target"), "config")
    return cfg


_SYNTH_KEYS = tuple(SynthConfig.__dataclass_fields__)


def build_synth(section: dict, where: str) -> SynthConfig:
    _reject_unknown(section, _SYNTH_KEYS, where)
    if "rows" not in section or "seed" not in section:
        raise ConfigError(f"{where} needs at least 'rows' and 'seed'")
    kwargs = dict(section)
    if "sample_period" in kwargs:
        kwargs["sample_period"] = parse_duration(kwargs["sample_period"])
    return SynthConfig(**kwargs)


_DATASET_KEYS = ("synth", "csv", "timestamp_column", "features", "targets",
                 "split_ratio", "resample_to", "feature_map")


def build_dataset(name: str, section: dict) -> DatasetSpec:
    where = f"'{name}' section"
    _reject_unknown(section, _DATASET_KEYS, where)
    synth = None
    if "synth" in section:
        if not isinstance(section["synth"], dict):
            raise ConfigError(f"{where}: 'synth' must be an object")
        synth = build_synth(section["synth"], f"{where} synth block")
    feature_map = section.get("feature_map")
    if feature_map is not None:
        if not isinstance(feature_map, list):
            raise ConfigError(f"{where}: feature_map must be a list")
        feature_map = tuple(feature_map)
    resample_to = section.get("resample_to")
    return DatasetSpec(
        name=name,
        synth=synth,
        csv_path=section.get("csv"),
        timestamp_column=section.get("timestamp_column", "timestamp"),
        feature_columns=tuple(section.get("features", ())),
        target_columns=tuple(section.get("targets", ())),
        split_ratio=float(section.get("split_ratio", 0.67)),
        resample_to=None if resample_to is None else parse_duration(resample_to),
        feature_map=feature_map)


_TRAIN_KEYS = ("epochs", "learning_rate", "beta1", "beta2", "epsilon",
               "batch_size", "seed", "forcing", "clip_norm", "freeze")


def build_train_config(section: dict, phase: str) -> TrainConfig:
    _reject_unknown(section, _TRAIN_KEYS, f"'{phase}' section")
    kwargs = dict(section)
    kwargs.setdefault("epochs", _PHASE_DEFAULT_EPOCHS[phase])
    if "forcing" in kwargs:
        kwargs["forcing"] = ForcingMode.parse(kwargs["forcing"])
    if "freeze" in kwargs:
        kwargs["freeze"] = tuple(kwargs["freeze"])
    for key in ("epochs", "batch_size", "seed"):
        if key in kwargs:
            try:
                kwargs[key] = int(kwargs[key])
            except (TypeError, ValueError):
                raise ConfigError(
                    f"'{phase}' section: {key} must be an integer, "
                    f"got {kwargs[key]!r}") from None
    return TrainConfig(**kwargs)


_EXPERIMENT_KEYS = ("input_steps", "hidden_units", "horizons", "stride",
                    "seeds", "out", "workers")


def build_experiment(cfg: dict) -> ExperimentSpec:
    """Materialize a validated config dict into an ExperimentSpec."""
    exp = cfg.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("config section 'experiment' must be an object")
    _reject_unknown(exp, _EXPERIMENT_KEYS, "'experiment' section")
    horizons = exp.get("horizons", [1, 8, 16, 24])
    if not isinstance(horizons, list) or not horizons:
        raise ConfigError("experiment.horizons must be a non-empty list")
    seeds = exp.get("seeds", [0, 1, 2, 3, 4])
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("experiment.seeds must be a non-empty list")
    return ExperimentSpec(
        source=build_dataset("source", _require_mapping(cfg, "source")),
        target=build_dataset("target", _require_mapping(cfg, "target")),
        input_steps=int(exp.get("input_steps", 24)),
        hidden_units=int(exp.get("hidden_units", 32)),
        horizons=tuple(int(h) for h in horizons),
        stride=int(exp.get("stride", 1)),
        pretrain=build_train_config(cfg.get("pretrain", {}), "pretrain"),
        finetune=build_train_config(cfg.get("finetune", {}), "finetune"),
        scratch=build_train_config(cfg.get("scratch", {}), "scratch"),
        seeds=tuple(int(s) for s in seeds))


def resolve_out(cli_value, cfg: dict | None) -> str:
    """Output directory precedence: --out flag, config, environment, default."""
    if cli_value:
        return cli_value
    if cfg:
        exp = cfg.get("experiment")
        if isinstance(exp, dict) and exp.get("out"):
            return str(exp["out"])
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return env
    return DEFAULT_OUT


def resolve_workers(cli_value, cfg: dict | None) -> int | None:
    if cli_value is not None:
        if cli_value < 1:
            raise ConfigError(f"workers must be >= 1, got {cli_value}")
        return cli_value
    if cfg:
        exp = cfg.get("experiment")
        if isinstance(exp, dict) and "workers" in exp:
            w = int(exp["workers"])
            if w < 1:
                raise ConfigError(f"experiment.workers must be >= 1, got {w}")
            return w
    return None
