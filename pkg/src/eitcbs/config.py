"""Flat key-value run configuration.

One TOML document, flat keys only, explicit units in key names (no unit
inference).  Unknown keys are rejected by name; every default that fills a
missing key is echoed in the output metadata.  Environment variables with
the EITCBS_ prefix override file values (e.g. EITCBS_SEED=7), and CLI
flags override both.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channels import PolarizationChannel
from .engine import ConfigError, McParams
from .levels import RB87_D1_WAVELENGTH_CM, ControlCoupling, LevelScheme
from .medium import CloudGeometry
from .pulse import PulseSpec

__all__ = ["RunConfig", "parse_config", "load_config", "ENV_PREFIX"]

ENV_PREFIX = "EITCBS_"

_DEFAULTS: dict[str, Any] = {
    "channels": ["H+->H+", "H+->H-", "H-->H+", "H-->H-"],
    "wavelength_cm": RB87_D1_WAVELENGTH_CM,
    "peak_density_per_cm3": 3.2e10,
    "gaussian_radius_cm": 0.5,
    "control_detuning_over_gamma": 0.0,
    "doppler_width_over_gamma": 0.0,
    "max_order": 8,
    "workers": 1,
    "delta_min_over_gamma": -3.0,
    "delta_max_over_gamma": 3.0,
    "delta_points": 41,
    "pulse_tau_gamma": 200.0,
    "carrier_delta_over_gamma": 0.0,
    "time_min_gamma": None,  # None -> -3 tau
    "time_max_gamma": None,  # None -> +5 tau
    "time_points": 1024,
    "pulse_freq_nodes": 33,
    "pulse_freq_halfspan_over_gamma": None,  # None -> 8 / tau
    "diag_deltas_over_gamma": [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0],
    "diag_pair_separation_cm": None,  # None -> gaussian_radius / 5
    "out_dir": ".",
    "format": "csv",
    "per_order_columns": True,
    "backend": None,
}

_REQUIRED = ("mode", "seed", "rabi_over_gamma")
_MODES = ("spectrum", "pulse", "diagnostics")
_ALL_KEYS = set(_DEFAULTS) | set(_REQUIRED) | {"samples"}

_BOOL_KEYS = {"per_order_columns"}
_INT_KEYS = {"seed", "samples", "max_order", "workers", "delta_points",
             "time_points", "pulse_freq_nodes"}
_LIST_KEYS = {"channels", "diag_deltas_over_gamma"}


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one batch run."""

    mode: str
    seed: int
    rabi_over_gamma: float
    samples: int | None
    values: dict = field(repr=False)
    defaults_applied: list = field(default_factory=list)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:  # pragma: no cover - attribute plumbing
            raise AttributeError(name) from exc

    # -- physics objects ---------------------------------------------------

    def scheme(self) -> LevelScheme:
        return LevelScheme(wavelength=self.values["wavelength_cm"])

    def cloud(self) -> CloudGeometry:
        return CloudGeometry(
            peak_density=self.values["peak_density_per_cm3"],
            gaussian_radius=self.values["gaussian_radius_cm"],
        )

    def coupling(self) -> ControlCoupling:
        return ControlCoupling(
            rabi_frequency=self.rabi_over_gamma,
            detuning_control=self.values["control_detuning_over_gamma"],
        )

    def channels(self) -> list[PolarizationChannel]:
        return [PolarizationChannel.from_label(c) for c in self.values["channels"]]

    def mc(self) -> McParams:
        if self.samples is None:
            raise ConfigError("samples is required for this mode")
        return McParams(
            samples=self.samples,
            seed=self.seed,
            max_order=self.values["max_order"],
            workers=self.values["workers"],
            backend=self.values["backend"],
            doppler_width=self.values["doppler_width_over_gamma"],
        )

    def pulse(self) -> PulseSpec:
        return PulseSpec(
            tau=self.values["pulse_tau_gamma"],
            carrier_delta=self.values["carrier_delta_over_gamma"],
        )

    def delta_grid(self):
        import numpy as np

        return np.linspace(
            self.values["delta_min_over_gamma"],
            self.values["delta_max_over_gamma"],
            self.values["delta_points"],
        )

    def time_grid(self):
        import numpy as np

        tau = self.values["pulse_tau_gamma"]
        lo = self.values["time_min_gamma"]
        hi = self.values["time_max_gamma"]
        lo = -3.0 * tau if lo is None else lo
        hi = 5.0 * tau if hi is None else hi
        return np.linspace(lo, hi, self.values["time_points"])

    # -- reporting ----------------------------------------------------------

    def resolved(self) -> dict:
        out = {"mode": self.mode, "seed": self.seed,
               "rabi_over_gamma": self.rabi_over_gamma, "samples": self.samples}
        out.update(self.values)
        return out

    def digest(self) -> str:
        payload = json.dumps(self.resolved(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _coerce(key: str, value):
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        raise ConfigError(f"{key} must be a boolean")
    if key in _INT_KEYS:
        if isinstance(value, bool) or (not isinstance(value, int) and not (
            isinstance(value, str) and value.lstrip("-").isdigit()
        )):
            raise ConfigError(f"{key} must be an integer")
        return int(value)
    if key in _LIST_KEYS:
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        if isinstance(value, list):
            return value
        raise ConfigError(f"{key} must be a list")
    if key in ("mode", "format", "out_dir", "backend"):
        return value if value is None else str(value)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number") from exc


def _validate(values: dict) -> None:
    def positive(key, strict=True):
        v = values.get(key)
        if v is None:
            return
        if (strict and v <= 0) or (not strict and v < 0):
            bound = ">" if strict else ">="
            raise ConfigError(f"{key} must be {bound} 0 (got {v})")

    if values["mode"] not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES} (got {values['mode']!r})")
    if values["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json (got {values['format']!r})")
    positive("rabi_over_gamma", strict=False)
    positive("peak_density_per_cm3", strict=False)
    positive("gaussian_radius_cm")
    positive("wavelength_cm")
    positive("pulse_tau_gamma")
    positive("doppler_width_over_gamma", strict=False)
    for key in ("samples", "max_order", "workers", "delta_points", "time_points",
                "pulse_freq_nodes"):
        v = values.get(key)
        if v is not None and v < 1:
            raise ConfigError(f"{key} must be >= 1 (got {v})")
    if values["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    if values["mode"] in ("spectrum", "pulse") and values.get("samples") is None:
        raise ConfigError("samples is required for spectrum and pulse modes")
    for label in values["channels"]:
        PolarizationChannel.from_label(label)


def parse_config(text: str, overrides: dict | None = None,
                 env: dict | None = None) -> RunConfig:
    """Parse and validate a flat TOML config document.

    Precedence: CLI overrides > environment (EITCBS_*) > file > defaults.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    unknown = sorted(set(raw) - _ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    env = os.environ if env is None else env
    env_overrides = {}
    for key in _ALL_KEYS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            env_overrides[key] = env[env_key]

    merged: dict[str, Any] = {}
    defaults_applied = []
    for key in sorted(_ALL_KEYS):
        if overrides and key in overrides and overrides[key] is not None:
            merged[key] = _coerce(key, overrides[key])
        elif key in env_overrides:
            merged[key] = _coerce(key, env_overrides[key])
        elif key in raw:
            merged[key] = _coerce(key, raw[key])
        elif key in _DEFAULTS:
            merged[key] = _DEFAULTS[key]
            defaults_applied.append(key)
        elif key == "samples":
            merged[key] = None
        else:
            raise ConfigError(f"missing required config key: {key}")

    _validate(merged)
    mode = merged.pop("mode")
    seed = merged.pop("seed")
    rabi = merged.pop("rabi_over_gamma")
    samples = merged.pop("samples")
    return RunConfig(
        mode=mode,
        seed=seed,
        rabi_over_gamma=rabi,
        samples=samples,
        values=merged,
        defaults_applied=defaults_applied,
    )


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode()
    return parse_config(text, overrides=overrides)
