"""Run configuration: INI-style file with ``[device]``, ``[gate]``, ``[sweep]``,
``[integrator]`` and ``[output]`` sections.

Frequencies are written in linear MHz, decoherence rates in linear kHz and
times in ns; they are converted to rad/ns exactly once, here. Angles accept
plain radians or multiples of pi (``0.5pi``, ``-pi/2``).

Example::

    [device]
    omega_max_mhz = 45
    alpha1_mhz = 220

    [gate]
    axis = x
    angle = 0.5pi

    [sweep]
    omega_max_mhz = 20, 60, 41
"""

import configparser
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Optional

import numpy as np

from ..dynamics import METHODS, IntegratorOptions
from ..errors import ConfigError
from ..model import KHZ, MHZ, CoupledSystemParams, TransmonParams
from ..synthesis import DragCorrection

WORKERS_ENV = "GEOTOC_MAX_WORKERS"
SWEEP_AXES = ("angle", "delta", "epsilon", "omega_max_mhz", "beta", "nu_mhz", "delta1_mhz")

_ANGLE = re.compile(
    r"^([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?$"
)


def parse_angle(text):
    """Parse ``1.2``, ``0.5pi``, ``pi/2``, ``-pi`` or ``-0.25*pi`` into radians."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    m = _ANGLE.match(s)
    if m:
        value = float(m.group(2) or 1.0) * math.pi
        if m.group(3):
            value /= float(m.group(3))
        return -value if m.group(1) == "-" else value
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"not an angle: {text!r}") from None


@dataclass(frozen=True)
class SweepAxis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("sweep count must be >= 1")
        if self.start > self.stop:
            raise ConfigError("sweep start must not exceed stop")

    def values(self):
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class DeviceConfig:
    omega_max_mhz: float = 45.0
    alpha1_mhz: float = 220.0
    alpha2_mhz: float = 180.0
    kappa_minus_khz: float = 4.0
    kappa_z_khz: float = 4.0
    g12_mhz: float = 8.0
    delta1_mhz: float = 320.0
    beta: float = 1.3
    nu_mhz: Optional[float] = None
    drag: bool = True

    @property
    def omega_max(self):
        return self.omega_max_mhz * MHZ

    def transmon(self, which=1):
        alpha = self.alpha1_mhz if which == 1 else self.alpha2_mhz
        return TransmonParams(alpha * MHZ, self.kappa_minus_khz * KHZ, self.kappa_z_khz * KHZ)

    def coupled(self, delta1_mhz=None):
        d1 = self.delta1_mhz if delta1_mhz is None else delta1_mhz
        return CoupledSystemParams(self.g12_mhz * MHZ, d1 * MHZ, self.transmon(1), self.transmon(2))

    def drag_correction(self):
        return DragCorrection(self.drag, self.alpha1_mhz * MHZ)


@dataclass(frozen=True)
class GateConfig:
    axis: str = "X"
    angle: float = math.pi / 2
    vartheta: float = math.pi / 2
    varphi0: float = math.pi / 2
    kind: str = "geometric"


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int = 4000
    dt: Optional[float] = None
    method: Optional[str] = None
    convergence_check: bool = False
    workers: Optional[int] = None

    def options(self):
        return IntegratorOptions(
            dt=self.dt, method=self.method, convergence_check=self.convergence_check, steps=self.steps
        )


@dataclass(frozen=True)
class OutputConfig:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    device: DeviceConfig = field(default_factory=DeviceConfig)
    gate: GateConfig = field(default_factory=GateConfig)
    sweep: Dict[str, SweepAxis] = field(default_factory=dict)
    state_grid: Optional[int] = None
    n_states: Optional[int] = None
    sweep_axes: str = "beta,nu"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def axis(self, name, default):
        return self.sweep.get(name, default)

    def workers(self):
        n = self.integrator.workers or os.cpu_count() or 1
        cap = os.environ.get(WORKERS_ENV)
        if cap:
            try:
                n = min(n, max(1, int(cap)))
            except ValueError:
                raise ConfigError(f"must be an integer, got {cap!r}", key=WORKERS_ENV) from None
        return max(1, n)

    def manifest(self):
        """Resolved configuration with linear and angular units side by side."""
        dev = asdict(self.device)
        for name in ("omega_max", "alpha1", "alpha2", "g12", "delta1", "nu"):
            v = dev.get(f"{name}_mhz")
            dev[f"{name}_rad_per_ns"] = None if v is None else v * MHZ
        for name in ("kappa_minus", "kappa_z"):
            dev[f"{name}_rad_per_ns"] = dev[f"{name}_khz"] * KHZ
        return {
            "device": dev,
            "gate": asdict(self.gate),
            "sweep": {k: asdict(v) for k, v in sorted(self.sweep.items())},
            "state_grid": self.state_grid,
            "n_states": self.n_states,
            "sweep_axes": self.sweep_axes,
            "integrator": asdict(self.integrator),
            "output": asdict(self.output),
        }


def _parse_bool(text):
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional(conv):
    def parse(text):
        s = str(text).strip().lower()
        return None if s in ("", "none", "auto") else conv(text)

    return parse


_FIELD_PARSERS = {
    "axis": lambda s: str(s).strip().upper(),
    "angle": parse_angle,
    "vartheta": parse_angle,
    "varphi0": parse_angle,
    "kind": lambda s: str(s).strip().lower(),
    "drag": _parse_bool,
    "convergence_check": _parse_bool,
    "steps": int,
    "workers": _parse_optional(int),
    "dt": _parse_optional(float),
    "method": _parse_optional(lambda s: str(s).strip().lower()),
    "nu_mhz": _parse_optional(float),
    "format": lambda s: str(s).strip().lower(),
    "path": _parse_optional(str),
}


def _section(cls, items, section):
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, raw in items.items():
        if key not in known:
            raise ConfigError("unknown key", key=f"{section}.{key}")
        parser = _FIELD_PARSERS.get(key, float)
        try:
            kwargs[key] = parser(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), key=f"{section}.{key}") from None
    return cls(**kwargs)


def parse_sweep_axis(text, key="sweep"):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ConfigError("expected 'start, stop, count'", key=key)
    try:
        conv = parse_angle if "angle" in key else float
        axis = SweepAxis(conv(parts[0]), conv(parts[1]), int(parts[2]))
    except ConfigError as exc:
        raise ConfigError(str(exc), key=key) from None
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from None
    return axis


def _validate(cfg):
    g = cfg.gate
    if g.axis not in ("X", "Y"):
        raise ConfigError("axis must be x or y", key="gate.axis")
    if g.kind not in ("geometric", "dynamical"):
        raise ConfigError("kind must be geometric or dynamical", key="gate.kind")
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json", key="output.format")
    if cfg.integrator.method is not None and cfg.integrator.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}", key="integrator.method")
    if cfg.integrator.steps < 1:
        raise ConfigError("must be >= 1", key="integrator.steps")
    if cfg.integrator.dt is not None and not cfg.integrator.dt > 0:
        raise ConfigError("must be positive", key="integrator.dt")
    if cfg.state_grid is not None and cfg.state_grid < 2:
        raise ConfigError("must be >= 2", key="sweep.state_grid")
    if cfg.n_states is not None and cfg.n_states < 2:
        raise ConfigError("must be >= 2", key="sweep.n_states")
    if cfg.sweep_axes not in ("beta,nu", "delta1,beta"):
        raise ConfigError("must be 'beta,nu' or 'delta1,beta'", key="sweep.axes")
    d = cfg.device
    for name in ("omega_max_mhz", "alpha1_mhz", "alpha2_mhz", "g12_mhz", "beta"):
        if not getattr(d, name) > 0:
            raise ConfigError("must be positive", key=f"device.{name}")
    for name in ("kappa_minus_khz", "kappa_z_khz"):
        if getattr(d, name) < 0:
            raise ConfigError("must be non-negative", key=f"device.{name}")
    return cfg


def load_config(path=None, text=None):
    """Read a configuration file (or a string) into a :class:`RunConfig`."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        if text is not None:
            parser.read_string(text)
        elif path is not None:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    sections = {"device", "gate", "sweep", "integrator", "output"}
    for name in parser.sections():
        if name not in sections:
            raise ConfigError("unknown section", key=name)

    def items(name):
        return dict(parser.items(name)) if parser.has_section(name) else {}

    sweep_items = items("sweep")
    sweep = {}
    extras = {}
    for key, raw in sweep_items.items():
        if key in SWEEP_AXES:
            sweep[key] = parse_sweep_axis(raw, key=f"sweep.{key}")
        elif key in ("state_grid", "n_states"):
            try:
                extras[key] = int(raw)
            except ValueError:
                raise ConfigError("must be an integer", key=f"sweep.{key}") from None
        elif key == "axes":
            extras["sweep_axes"] = str(raw).replace(" ", "").lower()
        else:
            raise ConfigError("unknown key", key=f"sweep.{key}")

    cfg = RunConfig(
        device=_section(DeviceConfig, items("device"), "device"),
        gate=_section(GateConfig, items("gate"), "gate"),
        sweep=sweep,
        integrator=_section(IntegratorConfig, items("integrator"), "integrator"),
        output=_section(OutputConfig, items("output"), "output"),
        **extras,
    )
    return _validate(cfg)


def with_overrides(cfg, device=None, gate=None, sweep=None, integrator=None, output=None, **top):
    """Return a copy with the given per-section overrides applied (``None`` values skipped)."""

    def upd(obj, values):
        values = {k: v for k, v in (values or {}).items() if v is not None}
        return replace(obj, **values) if values else obj

    new_sweep = dict(cfg.sweep)
    new_sweep.update({k: v for k, v in (sweep or {}).items() if v is not None})
    cfg = replace(
        cfg,
        device=upd(cfg.device, device),
        gate=upd(cfg.gate, gate),
        sweep=new_sweep,
        integrator=upd(cfg.integrator, integrator),
        output=upd(cfg.output, output),
        **{k: v for k, v in top.items() if v is not None},
    )
    return _validate(cfg)
