"""TOML run configuration: schema, validation and defaults.

Layout (every block is a TOML table; unknown keys are rejected)::

    [model]
    m0 = 3.0
    [[model.channels]]          # one table per channel, in order
    g2 = 0.36
    e_th = 0.0
    lambda_cut = 5.0

    [grids]                     # fields are required only by commands using them
    t_max = 40.0                # survival, channels
    n_t = 801                   # survival, channels
    omega_n = 501               # spectral, spectrum
    q_max = 9.0                 # boost (unless boost.q_list is given)
    q_n = 601                   # boost (unless boost.q_list is given)

    [tolerances]                # optional
    rel_tol = 1e-8
    abs_tol = 1e-13
    max_subdivisions = 60
    panel_phase_budget = 0.7853981633974483
    max_panels = 200000
    normalization = 1e-6

    [spectrum]
    t_list = [1.0, 2.0, 10.0]

    [zeno]
    lambda = 0.5
    t_total = 4.0
    tau_list = [2.0, 1.0, 0.5, 0.25, 0.125]
    center = 3.0                # optional, defaults to model.m0

    [boost]
    q_list = [0.0, 1.0, 2.0]    # optional explicit momentum grid
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ModelError
from .model import Channel, LeeModel, validate_model
from .quadrature import QuadratureSpec
from .spectral import NORM_TOL

COMMANDS = ("spectral", "survival", "channels", "spectrum", "zeno", "boost")

_SCHEMA: dict[str, dict[str, type]] = {
    "model": {"m0": float, "channels": list},
    "grids": {"t_max": float, "n_t": int, "omega_n": int, "q_max": float, "q_n": int},
    "tolerances": {
        "rel_tol": float,
        "abs_tol": float,
        "max_subdivisions": int,
        "panel_phase_budget": float,
        "max_panels": int,
        "normalization": float,
    },
    "spectrum": {"t_list": list},
    "zeno": {"lambda": float, "t_total": float, "tau_list": list, "center": float},
    "boost": {"q_list": list},
}
_CHANNEL_KEYS = ("g2", "e_th", "lambda_cut")

_NEEDS: dict[str, tuple[str, ...]] = {
    "spectral": ("grids.omega_n",),
    "survival": ("grids.t_max", "grids.n_t"),
    "channels": ("grids.t_max", "grids.n_t"),
    "spectrum": ("grids.omega_n", "spectrum.t_list"),
    "zeno": ("zeno.lambda", "zeno.t_total", "zeno.tau_list"),
    "boost": (),
}


@dataclass(frozen=True)
class RunConfig:
    model: LeeModel
    spec: QuadratureSpec
    norm_tol: float
    grids: dict[str, Any]
    blocks: dict[str, dict[str, Any]]
    raw: dict[str, Any] = field(repr=False)

    def get(self, dotted: str, default=None):
        block, key = dotted.split(".")
        src = self.grids if block == "grids" else self.blocks.get(block, {})
        return src.get(key, default)


def _number(value, kind: type, where: str):
    if isinstance(value, bool):
        raise ConfigError(where, "expected a number, got a boolean")
    if kind is int:
        if not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"expected a finite number, got {value!r}")
    return float(value)


def _number_list(value, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(where, "expected a non-empty list of numbers")
    return [_number(v, float, f"{where}[{i}]") for i, v in enumerate(value)]


def _channel(entry, i: int) -> Channel:
    where = f"model.channels[{i}]"
    if not isinstance(entry, dict):
        raise ConfigError(where, "expected a table with g2, e_th, lambda_cut")
    for key in entry:
        if key not in _CHANNEL_KEYS:
            raise ConfigError(f"{where}.{key}", "unknown key")
    values = []
    for key in _CHANNEL_KEYS:
        if key not in entry:
            raise ConfigError(f"{where}.{key}", "missing required key")
        values.append(_number(entry[key], float, f"{where}.{key}"))
    return Channel(*values)


def parse_config(data: dict[str, Any], command: str) -> RunConfig:
    """Validate a decoded TOML document for ``command``.

    Raises
    ------
    ConfigError
        Naming the first offending dotted key.
    """
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    for block, body in data.items():
        if block not in _SCHEMA:
            raise ConfigError(block, "unknown block")
        if not isinstance(body, dict):
            raise ConfigError(block, "expected a table")
        for key in body:
            if key not in _SCHEMA[block]:
                raise ConfigError(f"{block}.{key}", "unknown key")

    model_block = data.get("model")
    if model_block is None:
        raise ConfigError("model", "missing required block")
    if "m0" not in model_block:
        raise ConfigError("model.m0", "missing required key")
    m0 = _number(model_block["m0"], float, "model.m0")
    chans = model_block.get("channels")
    if not isinstance(chans, list) or not chans:
        raise ConfigError("model.channels", "expected at least one [[model.channels]] table")
    channels = [_channel(c, i) for i, c in enumerate(chans)]
    for i, ch in enumerate(channels):
        try:
            validate_model(LeeModel(m0, (ch,)))
        except ModelError as exc:
            raise ConfigError(f"model.channels[{i}]", str(exc)) from None
    model = validate_model(LeeModel(m0, tuple(channels)))

    blocks: dict[str, dict[str, Any]] = {}
    for block in ("grids", "tolerances", "spectrum", "zeno", "boost"):
        out = {}
        for key, value in data.get(block, {}).items():
            where = f"{block}.{key}"
            kind = _SCHEMA[block][key]
            out[key] = _number_list(value, where) if kind is list else _number(value, kind, where)
        blocks[block] = out

    for dotted in _NEEDS[command]:
        block, key = dotted.split(".")
        if key not in blocks[block]:
            raise ConfigError(dotted, f"required by the {command!r} command")
    if command == "boost" and "q_list" not in blocks["boost"]:
        for dotted in ("grids.q_max", "grids.q_n"):
            if dotted.split(".")[1] not in blocks["grids"]:
                raise ConfigError(dotted, "required by 'boost' unless boost.q_list is given")

    g = blocks["grids"]
    for key in ("n_t", "omega_n", "q_n"):
        if key in g and g[key] < 2:
            raise ConfigError(f"grids.{key}", "needs at least 2 points")
    for key in ("t_max", "q_max"):
        if key in g and g[key] <= 0:
            raise ConfigError(f"grids.{key}", "must be positive")
    if command == "spectrum" and any(t <= 0 for t in blocks["spectrum"]["t_list"]):
        raise ConfigError("spectrum.t_list", "all times must be positive")
    if command == "zeno":
        z = blocks["zeno"]
        if z["lambda"] <= 0:
            raise ConfigError("zeno.lambda", "must be positive")
        if z["t_total"] <= 0:
            raise ConfigError("zeno.t_total", "must be positive")
        if any(t <= 0 for t in z["tau_list"]):
            raise ConfigError("zeno.tau_list", "all periods must be positive")
    if command == "boost" and any(q < 0 for q in blocks["boost"].get("q_list", [])):
        raise ConfigError("boost.q_list", "momenta must be non-negative")

    tol = dict(blocks["tolerances"])
    norm_tol = tol.pop("normalization", NORM_TOL)
    try:
        spec = QuadratureSpec(**tol)
    except ValueError as exc:
        raise ConfigError("tolerances", str(exc)) from None
    return RunConfig(model, spec, norm_tol, blocks["grids"], blocks, data)


def load_config(path: str | Path, command: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"not valid TOML: {exc}") from None
    return parse_config(data, command)
