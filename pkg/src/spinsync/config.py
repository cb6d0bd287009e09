"""Run configuration: nested dataclasses parsed from JSON, with dotted overrides.

Every field has a default matching the canonical setting (T = 1, omega_c = 20,
gamma = 1e-3, omega2 = 1.02, g = -1).  Unknown keys are rejected, and errors
name the offending key together with its line in the source file when known.
Angles may be written as numbers or as strings such as ``"pi/4"``, ``"3*pi/8"``
or ``"pi/3.2"``.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np

from .bath import BathParams, QuadratureSpec
from .correlations import DiscordGrid
from .model import ModelParams, bell_state, product_state
from .operators import DensityMatrix
from .sync import SyncConfig


class ConfigError(ValueError):
    """Invalid configuration; the message carries the key path and source line."""


_PI_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?|\.\d+))?\s*$")


def parse_angle(value: Any) -> float:
    """A float from a number or an expression ``[k][*]pi[/d]``."""
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            k = m.group(1)
            coef = -1.0 if k == "-" else 1.0 if k in ("", "+") else float(k)
            den = float(m.group(2)) if m.group(2) else 1.0
            if den == 0:
                raise ValueError(f"zero denominator in angle {value!r}")
            return coef * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError(f"not an angle: {value!r}")


@dataclass(frozen=True)
class InitialStateConfig:
    """``kind`` is ``product`` (angles), ``bell`` (``bell`` names the state) or
    ``matrix`` (``matrix`` is 4 rows of 4 entries, each a number or ``[re, im]``).
    """

    kind: Literal["product", "bell", "matrix"] = "product"
    theta1: float = math.pi / 4
    phi1: float = 0.0
    theta2: float = math.pi / 8
    phi2: float = math.pi / 2
    bell: str = "psi-"
    matrix: tuple | None = None

    def density(self) -> DensityMatrix:
        if self.kind == "product":
            return product_state(self.theta1, self.phi1, self.theta2, self.phi2).density()
        if self.kind == "bell":
            return bell_state(self.bell).density()
        if self.matrix is None:
            raise ValueError("initial.matrix is required when initial.kind is 'matrix'")
        rows = [[complex(*e) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in self.matrix]
        rho = DensityMatrix(np.array(rows, dtype=complex))
        rho.check()
        return rho


@dataclass(frozen=True)
class EvolveConfig:
    t_max: float = 500.0
    dt: float = 0.02
    method: Literal["auto", "spectral", "ode"] = "auto"


@dataclass(frozen=True)
class Axis:
    """``num`` evenly spaced points on ``[start, stop]``, or the explicit ``values``."""

    start: float = 0.0
    stop: float = 1.0
    num: int = 11
    values: tuple | None = None

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.array([float(v) for v in self.values])
        if self.num < 1:
            raise ValueError("axis needs num >= 1")
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class SweepConfig:
    delta: Axis = field(default_factory=lambda: Axis(0.0, 1.25, 11))
    g: Axis = field(default_factory=lambda: Axis(-1.0, 1.0, 9))


@dataclass(frozen=True)
class CorrelationConfig:
    """Correlation measures at ``t = 0, step, ..., t_max`` (or at ``times``) for each
    detuning in ``deltas`` (the model's own detuning when empty).
    """

    measured_party: Literal["a", "b"] = "b"
    t_max: float = 300.0
    step: float = 1.0
    times: tuple | None = None
    deltas: tuple | None = None
    grid: DiscordGrid = field(default_factory=DiscordGrid)
    clamp_tol: float = 1e-3

    def eval_times(self) -> np.ndarray:
        if self.times is not None:
            return np.array(sorted(float(t) for t in self.times))
        n = int(round(self.t_max / self.step))
        return np.arange(n + 1) * self.step


@dataclass(frozen=True)
class DephasingConfig:
    spectral_weight: float = 0.25
    interpolate: bool = True
    grid_step: float = 0.01


@dataclass(frozen=True)
class PositivityConfig:
    """``warn_tol``: eigenvalues below ``-warn_tol`` are reported; ``hard_cap``: beyond it the run fails."""

    warn_tol: float = 1e-7
    hard_cap: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=lambda: ModelParams(omega2=1.02, g=-1.0))
    bath: BathParams = field(default_factory=BathParams)
    initial: InitialStateConfig = field(default_factory=InitialStateConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    sync: SyncConfig = field(default_factory=SyncConfig)
    correlations: CorrelationConfig = field(default_factory=CorrelationConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    dephasing: DephasingConfig = field(default_factory=DephasingConfig)
    positivity: PositivityConfig = field(default_factory=PositivityConfig)
    include_lamb_shift: bool = True
    engine: Literal["auto", "redfield", "dephasing-exact"] = "auto"

    def resolved_engine(self, g: float | None = None) -> str:
        g = self.model.g if g is None else g
        if self.engine == "auto":
            return "dephasing-exact" if g == 1.0 else "redfield"
        if self.engine == "dephasing-exact" and g != 1.0:
            raise ConfigError(f"engine 'dephasing-exact' needs model.g = 1, got {g}")
        return self.engine


_ANGLE_FIELDS = {"theta1", "phi1", "theta2", "phi2"}


def _line_of(source: str | None, path: tuple[str, ...]) -> int | None:
    """Best-effort line number of the last key of ``path`` in the JSON text."""
    if not source or not path:
        return None
    pos = 0
    for key in path:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(source, pos)
        if m is None:
            return None
        pos = m.start()
    return source.count("\n", 0, pos) + 1


def _fail(msg: str, path: tuple[str, ...], source: str | None, origin: str) -> typing.NoReturn:
    where = ".".join(path) or "<root>"
    line = _line_of(source, path)
    loc = f"{origin}:{line}" if line is not None else origin
    raise ConfigError(f"{loc}: {where}: {msg}")


def _convert(tp, value, path, source, origin, base=None):
    origin_tp = typing.get_origin(tp)
    args = typing.get_args(tp)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path, source, origin, base)
    if origin_tp is typing.Union or (origin_tp is not None and type(None) in args):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path, source, origin)
    if origin_tp is Literal:
        if value not in args:
            _fail(f"must be one of {list(args)}, got {value!r}", path, source, origin)
        return value
    if tp is bool:
        if not isinstance(value, bool):
            _fail(f"expected true/false, got {value!r}", path, source, origin)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(f"expected an integer, got {value!r}", path, source, origin)
        return value
    if tp is float:
        try:
            if path[-1] in _ANGLE_FIELDS:
                return parse_angle(value)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError
            return float(value)
        except ValueError:
            _fail(f"expected a number, got {value!r}", path, source, origin)
    if tp is str:
        if not isinstance(value, str):
            _fail(f"expected a string, got {value!r}", path, source, origin)
        return value
    if tp is tuple:
        if not isinstance(value, (list, tuple)):
            _fail(f"expected a list, got {value!r}", path, source, origin)
        return _freeze(value)
    raise TypeError(f"unsupported config type {tp!r}")


def _freeze(v):
    return tuple(_freeze(x) for x in v) if isinstance(v, (list, tuple)) else v


def _build(cls, data, path, source, origin, base=None):
    """Instance of ``cls`` with the keys of ``data`` replaced on top of ``base`` (its defaults)."""
    if not isinstance(data, dict):
        _fail(f"expected an object, got {type(data).__name__}", path, source, origin)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    for key in data:
        if key not in names:
            _fail(f"unknown key (allowed: {', '.join(sorted(names))})", path + (key,), source, origin)
    try:
        base = cls() if base is None else base
        kwargs = {k: _convert(hints[k], v, path + (k,), source, origin, getattr(base, k)) for k, v in data.items()}
        return dataclasses.replace(base, **kwargs)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        _fail(str(exc), path, source, origin)


def config_from_dict(data: dict, source: str | None = None, origin: str = "<config>") -> RunConfig:
    return _build(RunConfig, data, (), source, origin)


def load_config(path: str | Path | None) -> tuple[RunConfig, dict]:
    """Parse a JSON config file (``None`` gives the defaults); returns the config and raw dict."""
    if path is None:
        return RunConfig(), {}
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg} (column {exc.colno})") from None
    return config_from_dict(data, text, str(path)), data


def _override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.key=value`` overrides to a raw config dict (value parsed as JSON if possible)."""
    out = json.loads(json.dumps(data))
    for item in overrides:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--override {item!r}: expected key=value")
        parts = key.strip().split(".")
        node = out
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"--override {item!r}: {p} is not a section")
            node = nxt
        node[parts[-1]] = _override_value(val)
    return out


def _plain(v):
    if dataclasses.is_dataclass(v):
        return {f.name: _plain(getattr(v, f.name)) for f in dataclasses.fields(v) if f.init}
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def config_to_dict(cfg: RunConfig) -> dict:
    """JSON-ready echo of ``cfg``; ``config_from_dict`` of it gives back an equal config."""
    return _plain(cfg)
