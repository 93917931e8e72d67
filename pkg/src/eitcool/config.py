"""Flat ``key=value`` run configuration and parameter sweeps."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ParameterError
from .params import Geometry, LambdaParams, ProbeParams, TrapParams

FLOAT_KEYS = {
    "omega1", "omega2", "delta", "gamma", "gamma1", "gamma2",
    "eta1", "eta2", "phi1", "phi2", "nu", "mass",
    "omegaP", "probe_start", "probe_stop", "tmax", "omega_max",
}
INT_KEYS = {"nmax", "npoints", "ntraj", "seed", "n0", "probe_count", "quadrature"}
STR_KEYS = {"pattern", "spectrum_file"}
LIST_KEYS = {"pattern_nodes", "pattern_weights"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | STR_KEYS | LIST_KEYS

LAMBDA_KEYS = ("omega1", "omega2", "delta", "gamma")
GEOMETRY_KEYS = ("eta1", "eta2", "phi1", "phi2")

REQUIRED = {
    "spectrum": LAMBDA_KEYS + ("probe_start", "probe_stop", "probe_count"),
    "rates": LAMBDA_KEYS + GEOMETRY_KEYS + ("nu",),
    "cool": LAMBDA_KEYS + GEOMETRY_KEYS + ("nu", "tmax"),
    "steady": LAMBDA_KEYS + GEOMETRY_KEYS + ("nu",),
    "mc": LAMBDA_KEYS + GEOMETRY_KEYS + ("nu", "tmax"),
    "optimize": ("nu", "delta", "gamma"),
    "generic": LAMBDA_KEYS + GEOMETRY_KEYS + ("spectrum_file", "tmax"),
}
COMMANDS = tuple(REQUIRED)

DEFAULTS = {
    "nmax": 12,
    "npoints": 101,
    "ntraj": 500,
    "seed": 0,
    "n0": 1,
    "pattern": "isotropic",
    "quadrature": 3,
}


def _convert(key, raw, line=None):
    try:
        if key in FLOAT_KEYS:
            return float(raw)
        if key in INT_KEYS:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if key in LIST_KEYS:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r}", line=line, key=key) from None


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        if key in self.values:
            return self.values[key]
        return DEFAULTS.get(key, default)

    def __getitem__(self, key):
        value = self.get(key)
        if value is None:
            raise ConfigError("required key is missing", key=key)
        return value

    def with_values(self, **updates) -> "RunConfig":
        for key in updates:
            if key not in KNOWN_KEYS:
                raise ConfigError("unknown key", key=key)
        return replace(self, values={**self.values, **updates})

    def require(self, command: str):
        if command not in REQUIRED:
            raise ConfigError(f"unknown subcommand {command!r}; expected one of {COMMANDS}")
        missing = [k for k in REQUIRED[command] if k not in self.values]
        if missing:
            raise ConfigError(f"missing required keys for {command!r}: {', '.join(missing)}",
                              key=missing[0])

    def lambda_params(self) -> LambdaParams:
        return LambdaParams(self["omega1"], self["omega2"], self["delta"], self["gamma"],
                            self.get("gamma1"), self.get("gamma2"))

    def geometry(self) -> Geometry:
        pattern = self.get("pattern")
        extra = {}
        if pattern == "custom":
            extra = dict(custom_nodes=self.get("pattern_nodes", ()),
                         custom_weights=self.get("pattern_weights", ()))
        return Geometry(self["eta1"], self["eta2"], self["phi1"], self["phi2"], pattern, **extra)

    def trap(self) -> TrapParams:
        return TrapParams(self["nu"], self.get("nmax"), self.get("mass"))

    def probe(self) -> ProbeParams:
        return ProbeParams(self.get("omegaP", 0.0))

    def validate(self):
        """Construct every parameter group whose keys are present."""
        if all(k in self.values for k in LAMBDA_KEYS):
            self.lambda_params()
        elif "gamma" in self.values and ("gamma1" in self.values or "gamma2" in self.values):
            # branching is checkable before the drive keys are known
            LambdaParams(1.0, 1.0, 0.0, self["gamma"], self.get("gamma1"), self.get("gamma2"))
        if all(k in self.values for k in GEOMETRY_KEYS):
            self.geometry()
        if "nu" in self.values:
            self.trap()
        return self


def parse_config(text: str) -> RunConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    values = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key=value", line=lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        if not raw:
            raise ConfigError("empty value", line=lineno, key=key)
        values[key] = _convert(key, raw, lineno)
    return RunConfig(values).validate()


@dataclass(frozen=True)
class SweepAxis:
    key: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.key not in KNOWN_KEYS:
            raise ConfigError("unknown sweep key", key=self.key)
        if self.count < 1:
            raise ConfigError("sweep count must be >= 1", key=self.key)
        if self.count > 1 and not self.start < self.stop:
            raise ConfigError("sweep needs start < stop", key=self.key)
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown sweep scale {self.scale!r}", key=self.key)
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log sweep needs a positive start", key=self.key)

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


def parse_sweep(text: str) -> SweepAxis:
    """``key=start:stop:count[:log]``."""
    if "=" not in text:
        raise ConfigError(f"sweep {text!r} is not key=start:stop:count[:log]")
    key, spec = text.split("=", 1)
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"sweep {text!r} is not key=start:stop:count[:log]", key=key)
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"cannot parse sweep {text!r}", key=key) from None
    scale = parts[3] if len(parts) == 4 else "linear"
    return SweepAxis(key.strip(), start, stop, count, scale)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple = ()

    @property
    def keys(self) -> tuple:
        return tuple(a.key for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(a.count for a in self.axes)

    def points(self):
        """Cartesian product in row-major order (last axis fastest)."""
        for combo in itertools.product(*(a.values() for a in self.axes)):
            yield dict(zip(self.keys, (float(v) for v in combo)))


def apply_point(config: RunConfig, point: dict) -> RunConfig:
    updates = {}
    for key, value in point.items():
        if key in INT_KEYS:
            value = int(round(value))
        updates[key] = value
    return config.with_values(**updates)
