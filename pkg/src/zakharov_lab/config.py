"""Flat ``key = value`` scenario configuration."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace

__all__ = ["ScenarioConfig", "ConfigError", "parse_config", "serialize_config",
           "OUTPUT_ENV", "INITIAL_KINDS", "N_KINDS", "AUDITS"]

OUTPUT_ENV = "ZAKHAROV_LAB_OUTPUT"
INITIAL_KINDS = ("ground_state_scaled", "gaussian", "standing_wave", "file")
N_KINDS = ("matched", "zero", "gaussian")
AUDITS = ("conservation", "virial", "sign", "monotonicity", "scattering", "growup",
          "normal_form")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _default_output() -> str:
    return os.environ.get(OUTPUT_ENV, "runs")


@dataclass(frozen=True)
class ScenarioConfig:
    initial_kind: str
    grid_n: int = 2048
    grid_r_max: float = 48.0
    alpha: float = 1.0
    dt: float = 1e-3
    t_final: float = 1.0
    sample_every: int = 100
    initial_a: float = 1.0
    initial_lambda: float = 1.0
    initial_theta: float = 0.0
    initial_sigma: float = 1.0
    initial_n_kind: str = "matched"
    initial_n_amplitude: float = 0.1
    initial_path: str | None = None
    monitors_virial: tuple = ()
    monitors_tails: tuple = ()
    monitors_norms: bool = False
    monitors_normal_form_beta: float | None = None
    audits: tuple = ("conservation",)
    trailing_window: float = 0.5
    output_dir: str = field(default_factory=_default_output)
    seed: int = 0

    def with_value(self, key: str, value) -> "ScenarioConfig":
        attr = _attr(key)
        return replace(self, **{attr: _coerce(key, attr, str(value))})


_REQUIRED = ("initial.kind",)
_POSITIVE = {"grid.r_max", "alpha", "dt", "t_final", "initial.lambda", "initial.sigma"}
_POSITIVE_INT = {"grid.n", "sample_every"}


def _attr(key: str) -> str:
    name = key.replace(".", "_")
    if name == "output_dir" or name in {f.name for f in fields(ScenarioConfig)}:
        return name
    raise ConfigError(f"unknown key {key!r}")


def _key(attr: str) -> str:
    for prefix in ("grid_", "initial_", "monitors_", "output_"):
        if attr.startswith(prefix):
            return prefix[:-1] + "." + attr[len(prefix):]
    return attr


def _float(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return v


def _coerce(key: str, attr: str, text: str):
    kind = {f.name: f.type for f in fields(ScenarioConfig)}[attr]
    text = text.strip()
    if attr in ("initial_kind", "initial_n_kind"):
        allowed = INITIAL_KINDS if attr == "initial_kind" else N_KINDS
        if text not in allowed:
            raise ConfigError(f"{key}: expected one of {allowed}, got {text!r}")
        return text
    if attr in ("monitors_virial", "monitors_tails"):
        return tuple(_float(key, x) for x in text.split(",") if x.strip())
    if attr == "audits":
        names = tuple(x.strip() for x in text.split(",") if x.strip())
        for name in names:
            if name not in AUDITS:
                raise ConfigError(f"audits: unknown audit {name!r}")
        return names
    if attr == "monitors_norms":
        if text.lower() not in ("true", "false"):
            raise ConfigError(f"{key}: expected true or false, got {text!r}")
        return text.lower() == "true"
    if attr in ("initial_path", "output_dir"):
        return text
    if attr == "monitors_normal_form_beta":
        return None if text.lower() in ("", "none") else _float(key, text)
    if kind == "int":
        v = _float(key, text)
        if v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        v = int(v)
    else:
        v = _float(key, text)
    if key in _POSITIVE_INT and v <= 0:
        raise ConfigError(f"{key}: must be a positive integer, got {text}")
    if key in _POSITIVE and v <= 0:
        raise ConfigError(f"{key}: must be positive, got {text}")
    if key == "grid.n" and v < 8:
        raise ConfigError(f"grid.n: need at least 8 nodes, got {v}")
    if key == "initial.a" and v < 0:
        raise ConfigError(f"initial.a: must be nonnegative, got {text}")
    return v


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        attr = _attr(key)
        if attr in values:
            raise ConfigError(f"{key}: given twice")
        values[attr] = _coerce(key, attr, val)
    for key in _REQUIRED:
        if _attr(key) not in values:
            raise ConfigError(f"missing required key {key!r}")
    cfg = ScenarioConfig(**values)
    if cfg.initial_kind == "file" and not cfg.initial_path:
        raise ConfigError("initial.path: required when initial.kind = file")
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "initial_path" and v is None:
            continue
        lines.append(f"{_key(f.name)} = {_fmt(v)}")
    return "\n".join(lines) + "\n"
