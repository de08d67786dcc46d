"""Line-based ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidArgumentError, UnknownKeyError
from .evolution import DatumSpec, Gaussian, SimConfig, SpectralBand, Transplant

#: documented defaults; every accepted key appears here
DEFAULTS = {
    "geometry": "hyperbolic3",
    "r_max": "40",
    "n": "4096",
    "dt": "0.001",
    "t_end": "1",
    "nonlinearity": "defocusing",
    "record_stride": "10",
    "boundary_tol": "1e-8",
    "datum": "gaussian:1",
    "mass": "1",
    "seed": "0",
}


def parse_datum(text: str, mass: float = 1.0) -> DatumSpec:
    """``gaussian:A``, ``band:N[:W]`` or ``transplant:A:N``."""
    name, *args = [s.strip() for s in text.strip().split(":")]
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise InvalidArgumentError(f"bad datum parameters in {text!r}") from None
    if not mass >= 0:
        raise InvalidArgumentError(f"mass must be nonnegative, got {mass}")
    amp = float(np.sqrt(mass))
    name = name.lower()
    if name == "gaussian" and len(nums) <= 1:
        return DatumSpec(Gaussian(*nums), amp)
    if name == "band" and 1 <= len(nums) <= 2:
        return DatumSpec(SpectralBand(*nums), amp)
    if name == "transplant" and len(nums) == 2:
        return DatumSpec(Transplant(Gaussian(nums[0]), nums[1]), amp)
    raise InvalidArgumentError(f"unrecognized datum {text!r}")


@dataclass
class RunConfig:
    sim: SimConfig
    seed: int
    values: dict
    warnings: list = field(default_factory=list)


def _coerce(key, raw, line):
    try:
        if key in ("n", "record_stride", "seed"):
            v = int(raw, 0)
            if key == "seed" and not 0 <= v < 2**64:
                raise ValueError
            return v
        if key in ("r_max", "dt", "t_end", "boundary_tol", "mass"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r}", line) from None
    return raw


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse, default-fill and validate a configuration text.

    Unknown keys raise UnknownKeyError; a repeated key keeps its last value
    and leaves a warning in ``RunConfig.warnings``.
    """
    raw = {}
    seen_at = {}
    warnings = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {line.strip()!r}", lineno)
        if key not in DEFAULTS:
            raise UnknownKeyError(f"unknown key {key!r}", lineno)
        if key in raw:
            warnings.append(f"duplicate key {key!r} on line {lineno} "
                            f"overrides line {seen_at[key]}")
        raw[key] = value
        seen_at[key] = lineno
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise UnknownKeyError(f"unknown key {key!r}")
        raw[key] = str(value)

    values = {**DEFAULTS, **raw}
    typed = {k: _coerce(k, v, seen_at.get(k)) for k, v in values.items()}
    sim = SimConfig(
        geometry=typed["geometry"], r_max=typed["r_max"], n=typed["n"],
        dt=typed["dt"], t_end=typed["t_end"], nonlinearity=typed["nonlinearity"],
        record_stride=typed["record_stride"], boundary_tol=typed["boundary_tol"],
        datum=parse_datum(typed["datum"], typed["mass"]),
    )
    if not sim.r_max > 0 or sim.n < 1:
        raise InvalidArgumentError("r_max must be positive and n >= 1")
    return RunConfig(sim, typed["seed"], values, warnings)
