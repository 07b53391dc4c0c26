"""Scenario configuration files.

A scenario is a YAML mapping with these sections (all optional; omitted keys
take the defaults shown)::

    protocol:
      z: null              # kHz; null means 5/sqrt(3)
      x_max: 5.0           # kHz
      schedule: cosine     # or piecewise-linear, with knots: [[0,0], ..., [1,1]]
      knots: null
    sweep:
      tau_ms: [0.05, 0.1, 0.2, 0.3, 0.8]
      beta_z: [0.6, 0.8]   # dimensionless beta*z; beta = beta_z / z
      sta: both            # off | on | both
      n_steps: null        # null means the adaptive default
    readout:
      matrix: null         # row-major confusion matrix T[i][j] = p(i|j)
    sampling:
      n_grid: [100, 1000, 10000]
      replicas: 10000
      seed: 20230601       # unsigned 64-bit
      scenarios: [sudden, adiabatic]   # plus "bare": one series per tau
    gamma:
      n_samples: 2001
    waveform:
      tau_ms: 0.05
      n_points: 101
    output:
      dir: results
      format: csv          # csv | json
    jobs: 1                # worker threads for grid points
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from importlib import resources

import yaml

from .protocols import DEFAULT_X_MAX, DEFAULT_Z, CosineRamp, PiecewiseLinearRamp
from .readout import ReadoutModel

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "default_config_text", "DEFAULTS"]

DEFAULTS = {
    "protocol": {"z": None, "x_max": DEFAULT_X_MAX, "schedule": "cosine", "knots": None},
    "sweep": {
        "tau_ms": [0.05, 0.1, 0.2, 0.3, 0.8],
        "beta_z": [0.6, 0.8],
        "sta": "both",
        "n_steps": None,
    },
    "readout": {"matrix": None},
    "sampling": {
        "n_grid": [100, 1000, 10000],
        "replicas": 10000,
        "seed": 20230601,
        "scenarios": ["sudden", "adiabatic"],
    },
    "gamma": {"n_samples": 2001},
    "waveform": {"tau_ms": 0.05, "n_points": 101},
    "output": {"dir": "results", "format": "csv"},
    "jobs": 1,
}


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""

    def __init__(self, field, message, source=None):
        self.field = field
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{field}: {message}")


def _merge(defaults, given, path, source):
    if not isinstance(given, dict):
        raise ConfigError(path or "<root>", "expected a mapping", source)
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        field = f"{path}.{key}" if path else str(key)
        if key not in defaults:
            raise ConfigError(field, "unknown key", source)
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value or {}, field, source)
        else:
            out[key] = value
    return out


def _number(raw, field, source, positive=True):
    value = raw
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}", source)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(field, f"must be a positive finite number, got {value!r}", source)
    return float(value)


def _integer(raw, field, source, minimum):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(field, f"expected an integer, got {raw!r}", source)
    if raw < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {raw}", source)
    return raw


def _number_list(raw, field, source):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(field, "must be a non-empty list", source)
    return tuple(_number(v, f"{field}[{i}]", source) for i, v in enumerate(raw))


@dataclass(frozen=True)
class ScenarioConfig:
    z: float
    x_max: float
    schedule: object
    tau_grid: tuple
    beta_z: tuple
    sta: str
    n_steps: int | None
    readout: ReadoutModel | None
    n_grid: tuple
    replicas: int
    scenarios: tuple
    seed: int
    gamma_samples: int
    waveform_tau: float
    waveform_points: int
    out_dir: str
    format: str
    jobs: int
    raw: dict

    @property
    def betas(self):
        return tuple(bz / self.z for bz in self.beta_z)

    @classmethod
    def from_dict(cls, data, source=None):
        d = _merge(DEFAULTS, data or {}, "", source)
        p, sw, sa, out = d["protocol"], d["sweep"], d["sampling"], d["output"]

        z = DEFAULT_Z if p["z"] is None else _number(p["z"], "protocol.z", source)
        x_max = _number(p["x_max"], "protocol.x_max", source, positive=False)
        if p["schedule"] == "cosine":
            schedule = CosineRamp()
        elif p["schedule"] == "piecewise-linear":
            try:
                schedule = PiecewiseLinearRamp(tuple(tuple(map(float, k)) for k in p["knots"] or ()))
            except (TypeError, ValueError) as exc:
                raise ConfigError("protocol.knots", str(exc), source) from None
        else:
            raise ConfigError("protocol.schedule", f"unknown schedule {p['schedule']!r}", source)

        sta = sw["sta"]
        if sta not in ("off", "on", "both"):
            raise ConfigError("sweep.sta", f"must be off, on or both, got {sta!r}", source)
        n_steps = sw["n_steps"]
        if n_steps is not None:
            n_steps = _integer(n_steps, "sweep.n_steps", source, 1)

        readout = None
        if d["readout"]["matrix"] is not None:
            try:
                readout = ReadoutModel.from_rows(d["readout"]["matrix"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("readout.matrix", str(exc), source) from None

        n_grid = sa["n_grid"]
        if not isinstance(n_grid, list) or not n_grid:
            raise ConfigError("sampling.n_grid", "must be a non-empty list", source)
        n_grid = tuple(_integer(n, f"sampling.n_grid[{i}]", source, 1) for i, n in enumerate(n_grid))
        if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ConfigError("sampling.n_grid", "must be strictly increasing", source)
        scenarios = sa["scenarios"]
        if not isinstance(scenarios, list) or not scenarios:
            raise ConfigError("sampling.scenarios", "must be a non-empty list", source)
        for i, name in enumerate(scenarios):
            if name not in ("sudden", "adiabatic", "bare"):
                raise ConfigError(f"sampling.scenarios[{i}]", f"unknown scenario {name!r}", source)
        if len(set(scenarios)) != len(scenarios):
            raise ConfigError("sampling.scenarios", "duplicate entries", source)
        seed = _integer(sa["seed"], "sampling.seed", source, 0)
        if seed >= 2**64:
            raise ConfigError("sampling.seed", "must fit in 64 bits", source)

        fmt = out["format"]
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format", f"must be csv or json, got {fmt!r}", source)
        if not isinstance(out["dir"], str) or not out["dir"]:
            raise ConfigError("output.dir", "must be a non-empty string", source)

        return cls(
            z=z,
            x_max=x_max,
            schedule=schedule,
            tau_grid=_number_list(sw["tau_ms"], "sweep.tau_ms", source),
            beta_z=_number_list(sw["beta_z"], "sweep.beta_z", source),
            sta=sta,
            n_steps=n_steps,
            readout=readout,
            n_grid=n_grid,
            replicas=_integer(sa["replicas"], "sampling.replicas", source, 2),
            scenarios=tuple(scenarios),
            seed=seed,
            gamma_samples=_integer(d["gamma"]["n_samples"], "gamma.n_samples", source, 100),
            waveform_tau=_number(d["waveform"]["tau_ms"], "waveform.tau_ms", source),
            waveform_points=_integer(d["waveform"]["n_points"], "waveform.n_points", source, 2),
            out_dir=out["dir"],
            format=fmt,
            jobs=_integer(d["jobs"], "jobs", source, 1),
            raw=d,
        )

    def override(self, **changes):
        """Copy with CLI overrides applied to the raw document, then revalidated."""
        d = copy.deepcopy(self.raw)
        if changes.get("seed") is not None:
            d["sampling"]["seed"] = changes["seed"]
        if changes.get("n_steps") is not None:
            d["sweep"]["n_steps"] = changes["n_steps"]
        if changes.get("out_dir") is not None:
            d["output"]["dir"] = changes["out_dir"]
        if changes.get("format") is not None:
            d["output"]["format"] = changes["format"]
        return ScenarioConfig.from_dict(d, source="command line")


def default_config_text():
    return resources.files("workfluct").joinpath("data/default.yaml").read_text()


def load_config(path=None):
    """Parse a scenario file; ``None`` loads the bundled default scenario."""
    if path is None:
        text, source = default_config_text(), "default.yaml"
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read config: {exc}", str(path)) from None
        source = str(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        field = f"line {mark.line + 1}" if mark else "<syntax>"
        raise ConfigError(field, f"YAML syntax error: {getattr(exc, 'problem', exc)}", source) from None
    return ScenarioConfig.from_dict(data, source=source)
