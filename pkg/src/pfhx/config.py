"""Run configuration: INI parsing, validation, and scenario assembly.

The config format is flat key/value pairs grouped into sections; the full
schema lives in docs/config.md.  Unknown sections or keys are rejected by
name, command-line flags override file values, and the tau/T step snapping
performed by the solver is surfaced as warnings at parse time.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .loop import Scenario
from .params import Params
from .profiles import input_function, profile_array

_CONTROLLERS = ("observer_predictor", "sano_static", "open_loop", "error_system")

# section -> key -> type tag
_SCHEMA: dict[str, dict[str, str]] = {
    "params": {k: "float" for k in ("h1", "h2", "l", "tau", "k1", "k2")},
    "grid": {"n_cells": "int"},
    "run": {
        "T": "float",
        "controller": "str",
        "sano_k": "float",
        "solver": "str",
        "cfl": "float",
        "snapshot_stride": "float",
        "seed": "int",
    },
    "initial": {
        "theta1": "str",
        "theta2": "str",
        "observer1": "str",
        "observer2": "str",
        "u1": "str",
        "u2": "str",
        "warmup_u1": "str",
        "warmup_u2": "str",
    },
    "output": {"dir": "str"},
    "sweep": {
        "tau": "floatlist",
        "k1": "floatlist",
        "k2": "floatlist",
        "h1": "floatlist",
        "h2": "floatlist",
        "workers": "int",
    },
    "freqresp": {"omega": "floatlist", "cycles": "int", "cfl": "float"},
}

_REQUIRED = (
    ("params", "h1"),
    ("params", "h2"),
    ("params", "l"),
    ("params", "tau"),
    ("params", "k1"),
    ("params", "k2"),
    ("grid", "n_cells"),
    ("run", "T"),
    ("run", "controller"),
)

_SWEEP_AXES = ("tau", "k1", "k2", "h1", "h2")


@dataclass
class Config:
    """Validated configuration for one invocation."""

    h1: float
    h2: float
    l: float
    tau: float
    k1: float
    k2: float
    n_cells: int
    T: float
    controller: str
    sano_k: float | None = None
    solver: str = "exact"
    cfl: float = 0.5
    snapshot_stride: float = 0.1
    seed: int = 0
    theta1: str = "zero"
    theta2: str = "zero"
    observer1: str = "zero"
    observer2: str = "zero"
    u1: str = "zero"
    u2: str = "zero"
    warmup_u1: str = "zero"
    warmup_u2: str = "zero"
    out_dir: str = "out"
    sweep_axes: dict = field(default_factory=dict)
    workers: int = 0
    freq_omegas: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    freq_cycles: int = 10
    freq_cfl: float = 0.5
    warnings: list = field(default_factory=list)

    def params(self) -> Params:
        try:
            return Params(
                h1=self.h1, h2=self.h2, l=self.l, tau=self.tau, k1=self.k1, k2=self.k2
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_scenario(self, **overrides) -> Scenario:
        values = dict(
            h1=self.h1, h2=self.h2, l=self.l, tau=self.tau, k1=self.k1, k2=self.k2
        )
        values.update(overrides)
        try:
            params = Params(**values)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return Scenario(
            params=params,
            n_cells=self.n_cells,
            T=self.T,
            controller=self.controller,
            theta0=(self.theta1, self.theta2),
            observer0=(self.observer1, self.observer2),
            sano_k=self.sano_k,
            u_open=(self.u1, self.u2),
            warmup_u=(self.warmup_u1, self.warmup_u2),
            solver=self.solver,
            cfl=self.cfl,
            snapshot_stride=self.snapshot_stride,
            seed=self.seed,
        )


def _parse_value(raw: str, kind: str, where: str):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind == "floatlist":
            if not raw:
                return []
            return [float(piece) for piece in raw.replace(",", " ").split()]
        return raw
    except ValueError:
        raise ConfigError(f"non-numeric value {raw!r} for key {where}") from None


def _read_raw(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        raw[section] = dict(parser.items(section))
    return raw


def parse_config(text: str, overrides: dict[str, object] | None = None) -> Config:
    """Parse and fully validate a config, applying flag overrides last.

    ``overrides`` maps dotted keys (e.g. ``params.tau``) to replacement
    values.  Raises ConfigError naming the offending key on any problem.
    """
    raw = _read_raw(text)
    for section, entries in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in entries:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
    if overrides:
        for dotted, value in overrides.items():
            section, key = dotted.split(".", 1)
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"unknown override {dotted}")
            raw.setdefault(section, {})[key] = str(value)
    for section, key in _REQUIRED:
        if section not in raw or key not in raw[section]:
            raise ConfigError(f"missing required key {section}.{key}")

    def get(section: str, key: str, default=None):
        if section in raw and key in raw[section]:
            return _parse_value(raw[section][key], _SCHEMA[section][key], f"{section}.{key}")
        return default

    cfg = Config(
        h1=get("params", "h1"),
        h2=get("params", "h2"),
        l=get("params", "l"),
        tau=get("params", "tau"),
        k1=get("params", "k1"),
        k2=get("params", "k2"),
        n_cells=get("grid", "n_cells"),
        T=get("run", "T"),
        controller=get("run", "controller"),
        sano_k=get("run", "sano_k"),
        solver=get("run", "solver", "exact"),
        cfl=get("run", "cfl", 0.5),
        snapshot_stride=get("run", "snapshot_stride", 0.1),
        seed=get("run", "seed", 0),
        theta1=get("initial", "theta1", "zero"),
        theta2=get("initial", "theta2", "zero"),
        observer1=get("initial", "observer1", "zero"),
        observer2=get("initial", "observer2", "zero"),
        u1=get("initial", "u1", "zero"),
        u2=get("initial", "u2", "zero"),
        warmup_u1=get("initial", "warmup_u1", "zero"),
        warmup_u2=get("initial", "warmup_u2", "zero"),
        out_dir=get("output", "dir", "out"),
        workers=get("sweep", "workers", 0),
        freq_omegas=get("freqresp", "omega", [0.5, 1.0, 2.0]),
        freq_cycles=get("freqresp", "cycles", 10),
        freq_cfl=get("freqresp", "cfl", 0.5),
    )
    for key in raw.get("sweep", {}):  # declaration order fixes the row order
        if key in _SWEEP_AXES:
            values = get("sweep", key)
            if values:
                cfg.sweep_axes[key] = values
    _validate(cfg)
    return cfg


def _validate(cfg: Config) -> None:
    params = cfg.params()  # checks positivity and finiteness
    if cfg.n_cells < 1:
        raise ConfigError(f"grid.n_cells must be >= 1, got {cfg.n_cells}")
    if not math.isfinite(cfg.T) or cfg.T <= 0:
        raise ConfigError(f"run.T must be positive, got {cfg.T}")
    if cfg.controller not in _CONTROLLERS:
        raise ConfigError(
            f"unknown controller {cfg.controller!r} (expected one of {_CONTROLLERS})"
        )
    if cfg.controller == "sano_static" and cfg.sano_k is None:
        raise ConfigError("missing required key run.sano_k (needed by sano_static)")
    if cfg.solver not in ("exact", "upwind"):
        raise ConfigError(f"run.solver must be exact or upwind, got {cfg.solver!r}")
    if not 0.0 < cfg.cfl <= 1.0:
        raise ConfigError(f"run.cfl must lie in (0, 1], got {cfg.cfl}")
    if not 0.0 < cfg.freq_cfl <= 1.0:
        raise ConfigError(f"freqresp.cfl must lie in (0, 1], got {cfg.freq_cfl}")
    if cfg.solver == "upwind" and cfg.controller != "open_loop":
        raise ConfigError("the upwind solver is available for open_loop runs only")
    if cfg.snapshot_stride <= 0:
        raise ConfigError(f"run.snapshot_stride must be positive, got {cfg.snapshot_stride}")
    if cfg.freq_cycles < 10:
        raise ConfigError(f"freqresp.cycles must be >= 10, got {cfg.freq_cycles}")
    if any(w < 0 for w in cfg.freq_omegas):
        raise ConfigError("freqresp.omega values must be nonnegative")
    if cfg.workers < 0:
        raise ConfigError(f"sweep.workers must be >= 0, got {cfg.workers}")

    grid = Grid(cfg.n_cells, cfg.l)
    probe = np.random.default_rng(0)
    for key in ("theta1", "theta2", "observer1", "observer2"):
        profile_array(getattr(cfg, key), grid, probe)
    for key in ("u1", "u2", "warmup_u1", "warmup_u2"):
        input_function(getattr(cfg, key))

    m, tau_used, tau_snapped = grid.snap_tau(cfg.tau)
    if tau_snapped:
        cfg.warnings.append(
            f"tau snapped from {cfg.tau:g} to {tau_used:g} ({m} steps of dt={grid.dt:g})"
        )
    n_steps, T_used, T_snapped = grid.snap_steps(cfg.T)
    if T_snapped:
        cfg.warnings.append(f"T snapped from {cfg.T:g} to {T_used:g}")
    if cfg.controller in ("observer_predictor", "sano_static") and n_steps <= m:
        raise ConfigError(
            f"run.T={cfg.T:g} must exceed the delay tau={tau_used:g} for controlled runs"
        )
    taus = cfg.sweep_axes.get("tau", [])
    for tau_value in taus:
        m_ax, tau_ax, _ = grid.snap_tau(tau_value)
        if cfg.controller in ("observer_predictor", "sano_static") and n_steps <= m_ax:
            raise ConfigError(
                f"run.T={cfg.T:g} must exceed every swept tau (violated by {tau_value:g})"
            )
