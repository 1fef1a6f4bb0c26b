"""JSON configuration loading with ``--set key=value`` overrides."""
from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig

FLOAT_FIELDS = {"length_scale", "signal_variance", "jitter", "step_cost", "beta_pop", "beta_ego"}
FLOAT_LIST_FIELDS = {"lambda_grid", "rho_grid", "fig1_betas"}


def _coerce(key, value):
    def num(v):
        return float(v) if isinstance(v, int) and not isinstance(v, bool) else v

    if key in FLOAT_FIELDS:
        return num(value)
    if key in FLOAT_LIST_FIELDS and isinstance(value, list):
        return [num(v) for v in value]
    return value


def resolve_config(values: dict) -> ExperimentConfig:
    """Build a config from a mapping, rejecting unknown keys."""
    if not isinstance(values, dict):
        raise ConfigError("<config>", "top level must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in values:
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
    try:
        return ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})
    except TypeError as exc:  # e.g. a string where a list was expected
        raise ConfigError("<config>", str(exc)) from exc


def load_config_dict(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError("--config", f"file not found: {path}") from None
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"malformed JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("<config>", "top level must be a JSON object")
    return data


def parse_override(item: str) -> tuple[str, object]:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError("--set", f"expected key=value, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def parse_config(path=None, overrides=(), seed: int | None = None) -> ExperimentConfig:
    """Resolve defaults < file < ``--set`` overrides < ``--seed``."""
    values = load_config_dict(path) if path is not None else {}
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value
    if seed is not None:
        values["master_seed"] = seed
    return resolve_config(values)


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
