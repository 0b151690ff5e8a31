"""Run configuration: flat ``key = value`` TOML files plus CLI overrides.

Documented keys (units in the name where it matters)::

    gamma_g, gamma_e          [gx, gy, gz] in MHz/T
    gamma_y                   [gy_ground, gy_excited] in MHz/T (optimize, bound-only)
    field_tesla               applied field magnitude
    direction                 label ("[-1-11]", "[001]", "[111]", ...) or [u, v, w]
    theta_deg                 bisector-plane angle from [001]; overrides direction
    polarization              label or [u, v, w]
    site                      site whose local frame defines phi / splittings (1..6)
    theta_start_deg, theta_stop_deg, theta_step_deg      scan grid
    phi_deg                   local xOz azimuth for optimize (else from direction)
    splittings_mhz_per_t      [delta_g, delta_e] per tesla (else from tensors)
    branching_ratio           optical R for spectrum (else from tensors)
    p0, gamma0, r1            burn rate, ground relaxation rate (1/s), decay branching
    gamma_h_mhz, omega0_mhz, baseline_od, window_mhz, resolution_mhz
    sidebands, sideband_amplitude, min_depth
    measurements              path to the measurement JSON (fit)
    out, features_out         output paths
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import geometry
from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class RunConfig:
    gamma_g: tuple | None = None
    gamma_e: tuple | None = None
    gamma_y: tuple | None = None
    field_tesla: float = 1.0
    direction: object = "[-1-11]"
    theta_deg: float | None = None
    polarization: object = "[111]"
    site: int = 3
    theta_start_deg: float = -90.0
    theta_stop_deg: float = 90.0
    theta_step_deg: float = 0.25
    phi_deg: float | None = None
    splittings_mhz_per_t: tuple | None = None
    branching_ratio: float | None = None
    p0: float = 1.0
    gamma0: float = 1.0
    r1: float = 1.0
    gamma_h_mhz: float = 0.1
    omega0_mhz: float = 0.0
    baseline_od: float = 0.3
    window_mhz: tuple = (-10.0, 10.0)
    resolution_mhz: float = 0.02
    sidebands: bool = False
    sideband_amplitude: float = 0.3
    min_depth: float = 1e-3
    measurements: str | None = None
    out: str | None = None
    features_out: str | None = None

    def field_direction(self) -> np.ndarray:
        if self.theta_deg is not None:
            return geometry.bisector_field(math.radians(self.theta_deg))
        return _as_direction("direction", self.direction)

    def polarization_vector(self) -> np.ndarray:
        return _as_direction("polarization", self.polarization)


_TRIPLETS = ("gamma_g", "gamma_e")
_PAIRS = ("gamma_y", "splittings_mhz_per_t", "window_mhz")
_FLOATS = (
    "field_tesla", "theta_deg", "theta_start_deg", "theta_stop_deg", "theta_step_deg",
    "phi_deg", "branching_ratio", "p0", "gamma0", "r1", "gamma_h_mhz", "omega0_mhz",
    "baseline_od", "resolution_mhz", "sideband_amplitude", "min_depth",
)
_POSITIVE = ("field_tesla", "gamma0", "gamma_h_mhz", "baseline_od", "resolution_mhz")
_NONNEG = ("branching_ratio", "p0", "r1", "sideband_amplitude", "min_depth")


def _as_direction(key, value) -> np.ndarray:
    try:
        return geometry.direction(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, str(exc)) from None


def _number(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return float(value)


def _vector(key, value, n) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(key, f"expected a list of {n} numbers, got {value!r}")
    return tuple(_number(key, v) for v in value)


def validate(raw: dict) -> RunConfig:
    """Check every key before any computation; errors name the offending key."""
    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    vals = {}
    for key, value in raw.items():
        if value is None:
            continue
        if key in _TRIPLETS:
            vals[key] = _vector(key, value, 3)
        elif key in _PAIRS:
            vals[key] = _vector(key, value, 2)
        elif key in _FLOATS:
            vals[key] = _number(key, value)
        elif key == "site":
            if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= 6:
                raise ConfigError(key, f"expected an integer 1..6, got {value!r}")
            vals[key] = value
        elif key == "sidebands":
            if not isinstance(value, bool):
                raise ConfigError(key, f"expected true/false, got {value!r}")
            vals[key] = value
        elif key in ("direction", "polarization"):
            _as_direction(key, value)
            vals[key] = value
        else:
            if not isinstance(value, str):
                raise ConfigError(key, f"expected a string, got {value!r}")
            vals[key] = value

    for key in _POSITIVE:
        if key in vals and not vals[key] > 0:
            raise ConfigError(key, "must be > 0")
    for key in _NONNEG:
        if key in vals and vals[key] < 0:
            raise ConfigError(key, "must be >= 0")
    if "theta_step_deg" in vals and not vals["theta_step_deg"] > 0:
        raise ConfigError("theta_step_deg", "must be > 0")
    for key in ("gamma_g", "gamma_e"):
        if key in vals and not vals[key][1] > 0:
            raise ConfigError(key, "gamma_y (second entry) must be > 0")
    if "gamma_y" in vals and not all(v > 0 for v in vals["gamma_y"]):
        raise ConfigError("gamma_y", "entries must be > 0")
    if "splittings_mhz_per_t" in vals and not all(v >= 0 for v in vals["splittings_mhz_per_t"]):
        raise ConfigError("splittings_mhz_per_t", "entries must be >= 0")
    if "window_mhz" in vals and not vals["window_mhz"][1] > vals["window_mhz"][0]:
        raise ConfigError("window_mhz", "expected [lo, hi] with hi > lo")
    return RunConfig(**vals)


def load(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"cannot parse {path}: {exc}") from None
        base = Path(path).parent
        # relative input paths resolve against the config file location
        if isinstance(raw.get("measurements"), str) and not Path(raw["measurements"]).is_absolute():
            raw["measurements"] = str(base / raw["measurements"])
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate(raw)
