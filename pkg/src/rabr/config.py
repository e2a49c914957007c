"""Experiment configuration with strict, per-kind parameter schemas."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("dispersion", "soliton", "propagate1d", "push", "bullet", "eitsit_design", "sine_gordon")

REQUIRED = object()

# key -> (type, default); REQUIRED marks keys without a default
SCHEMAS: dict[str, dict[str, tuple]] = {
    "dispersion": {
        "eta": (float, REQUIRED), "delta": (float, REQUIRED),
        "kappa_min": (float, -3.0), "kappa_max": (float, 3.0), "n_kappa": (int, 601),
    },
    "soliton": {
        "eta": (float, REQUIRED), "delta": (float, REQUIRED), "chi": (float, REQUIRED),
        "n_zeta": (int, 4096), "half_width": (float, None),
    },
    "propagate1d": {
        "eta": (float, REQUIRED), "delta": (float, REQUIRED), "chi": (float, REQUIRED),
        "tau_end": (float, REQUIRED), "n_zeta": (int, 4096), "half_width": (float, None),
        "boundary": (str, "sponge"), "scheme": (str, "fd4"), "cfl": (float, 0.5),
        "output_every": (int, 50), "p": (float, 0.0),
    },
    "push": {
        "eta": (float, REQUIRED), "delta": (float, REQUIRED), "chi": (float, REQUIRED),
        "p": (float, REQUIRED), "tau_end": (float, 400.0), "n_zeta": (int, 8192),
        "half_width": (float, 150.0), "boundary": (str, "sponge"), "cfl": (float, 0.5),
        "output_every": (int, 20), "push_medium": (bool, False),
    },
    "bullet": {
        "eta": (float, REQUIRED), "delta": (float, REQUIRED), "C": (float, REQUIRED),
        "theta0": (float, 0.0), "z_target": (float, 100.0), "n_zeta": (int, 2048),
        "n_x": (int, 128), "zeta_min": (float, None), "zeta_max": (float, None),
        "x_length": (float, None), "medium": (str, "ansatz"), "cfl": (float, 0.5),
        "output_every": (int, 50), "restart": (str, None),
    },
    "eitsit_design": {
        "gamma_2": (float, 1e7), "gamma_3": (float, 1e7), "gamma_4": (float, 1e7),
        "gamma_6": (float, 1e7), "Delta_b": (float, 3e8), "Omega_d": (float, 4e6),
        "Omega_a": (float, 1e5), "Omega_b": (float, 1e6), "alpha_0": (float, None),
        "alpha_a": (float, None), "alpha_b": (float, None), "n0": (float, 1.5),
        "Omega_R": (float, None), "Delta_raman": (float, None), "D": (float, 1e-3),
        "L": (float, 0.04), "gamma_raman": (float, None), "z": (float, None),
    },
    "sine_gordon": {
        "beta": (float, REQUIRED), "tau_end": (float, 50.0), "zeta_min": (float, -20.0),
        "zeta_max": (float, None), "n_zeta": (int, 4096), "probe": (float, None),
        "output_every": (int, 20),
    },
}


class ConfigValidationError(ValueError):
    """Configuration problem; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _coerce(path, typ, value):
    if value is None:
        return None
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigValidationError(path, f"expected a boolean, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(path, f"expected an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigValidationError(path, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigValidationError(path, f"expected a string, got {value!r}")
    return value


def validate_params(kind: str, params: dict) -> dict:
    if kind not in SCHEMAS:
        raise ConfigValidationError("kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    if not isinstance(params, dict):
        raise ConfigValidationError("params", "must be an object")
    schema = SCHEMAS[kind]
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise ConfigValidationError(f"params.{unknown[0]}", "unknown key")
    out = {}
    for key, (typ, default) in schema.items():
        if key in params:
            out[key] = _coerce(f"params.{key}", typ, params[key])
        elif default is REQUIRED:
            raise ConfigValidationError(f"params.{key}", "missing required key")
        else:
            out[key] = default
    return out


@dataclass
class ExperimentConfig:
    kind: str
    params: dict = field(default_factory=dict)
    output_dir: str | None = None
    seedless: bool = True

    @classmethod
    def from_dict(cls, data: dict, kind: str | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigValidationError("<root>", "configuration must be a JSON object")
        unknown = sorted(set(data) - {"kind", "params", "output_dir", "seedless"})
        if unknown:
            raise ConfigValidationError(unknown[0], "unknown key")
        cfg_kind = data.get("kind", kind)
        if cfg_kind is None:
            raise ConfigValidationError("kind", "missing required key")
        if kind is not None and cfg_kind != kind:
            raise ConfigValidationError("kind", f"config is for {cfg_kind!r}, not {kind!r}")
        seedless = data.get("seedless", True)
        if seedless is not True:
            raise ConfigValidationError("seedless", "all experiments are deterministic; must be true")
        out = data.get("output_dir")
        if out is not None and not isinstance(out, str):
            raise ConfigValidationError("output_dir", "must be a string")
        return cls(cfg_kind, validate_params(cfg_kind, data.get("params", {})), out, True)

    @classmethod
    def load(cls, path, kind: str | None = None) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigValidationError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data, kind)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "output_dir": self.output_dir,
                "seedless": self.seedless}
