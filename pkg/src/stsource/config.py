# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Layered scenario configuration read from TOML documents.

Lengths may be numbers or multiples of pi:

>>> round(parse_length("3*pi/4"), 6), round(parse_length("0.5pi"), 6), parse_length(2)
(2.356194, 1.570796, 2.0)
"""

import copy
import logging
import math
import re
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ValidationError
from .pde_core import (
    BoundaryConditions,
    ConstantProfile,
    PdeSystem,
    PointSensor,
    SineMode,
    validate_system,
    window_profile,
)
from .simulator import MIN_NODES, SensorArray, place_sensors_uniform
from .sources import (
    KINDS,
    MODAL_INCIPIENT,
    MODAL_STEP,
    SEPARABLE_WINDOW,
    ZERO,
    SourceModel,
)

logger = logging.getLogger(__name__)

_PI_LENGTH = re.compile(
    r"^\s*(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d+)?))?\s*$"
)

GAIN_MODES = ("pin-published", "pin", "solve")

DEFAULTS = {
    "system": {
        "a1": 0.0,
        "a2": 1.0,
        "a3": -2.0,
        "k_u": 2.0,
        "k_y": 1.0,
        "domain": [0.0, "pi"],
        "left": {"c": 1.0, "d": 0.0, "r": 0.0},
        "right": {"c": 1.0, "d": 0.0, "r": 0.0},
        "b_u": [{"kind": "mode", "index": 1}],
        "x0": {"kind": "mode", "index": 1},
        "u": 1.0,
    },
    "sensors": {"positions": ["pi/4", "3*pi/4"]},
    "source": {
        "kind": MODAL_STEP,
        "modes": [1, 2],
        "onsets": [10.0, 40.0],
        "amplitudes": [2.0, 3.0],
    },
    "observer": {"m": 2, "gamma": 100.0, "sigma": 1.0},
    "design": {
        "gains": "pin-published",
        "mu1": 1.0,
        "mu2": 1.0,
        "trace_p": 0.25,
        "epsilon1": "variable",
        "seed": 0,
        "method": "sdp",
    },
    "run": {"dt": 0.01, "horizon": 80.0, "nodes": 201, "eigensolver": "auto", "out": "out"},
}


def _merge(data: dict, changes: dict) -> dict:
    if data is None:
        return changes
    if changes is not None:
        for key, value in changes.items():
            if isinstance(value, dict) and key in data and isinstance(data[key], dict):
                data[key] = _merge(data[key], value)
            else:
                data[key] = value
    return data


def parse_length(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    match = _PI_LENGTH.match(str(value))
    if match is None:
        try:
            return float(value)
        except ValueError:
            raise ValidationError(f"cannot read {value!r} as a length") from None
    coef = match.group("coef")
    coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef) or float(coef)
    den = match.group("den")
    return coef * math.pi / (float(den) if den else 1.0)


def parse_shape(doc: dict, domain: tuple[float, float]):
    """A spatial shape from an inline table such as ``{kind = "mode", index = 2}``."""
    kind = doc.get("kind")
    scale = float(doc.get("scale", 1.0))
    if kind == "mode":
        return SineMode(int(doc["index"]), domain, scale)
    if kind == "window":
        return window_profile(parse_length(doc["start"]), parse_length(doc["stop"]), domain, scale)
    if kind == "constant":
        return ConstantProfile(float(doc.get("value", 0.0)))
    if kind == "zero":
        return ConstantProfile(0.0)
    if kind == "point":
        return PointSensor(parse_length(doc["position"]))
    raise ValidationError(f"unknown shape kind {kind!r}")


class ScenarioConfig:
    """Built-in defaults, then each document, then command-line overrides."""

    def __init__(self, *documents: dict, source_path: Path | None = None):
        self._data = copy.deepcopy(DEFAULTS)
        for document in documents:
            self._data = _merge(self._data, copy.deepcopy(document))
        self.source_path = source_path

    @classmethod
    def from_file(cls, path, *overrides: dict) -> "ScenarioConfig":
        path = Path(path)
        try:
            with path.open("rb") as f:
                document = tomllib.load(f)
        except FileNotFoundError:
            raise ValidationError(f"configuration file {path} does not exist") from None
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"configuration file {path} is not valid TOML: {exc}") from exc
        logger.debug("loaded configuration %s", path)
        return cls(document, *overrides, source_path=path)

    def _get_group_value(self, group: str, name: str, default: Any = None) -> Any:
        return self._data[group].get(name, default) if group in self._data else default

    def _set_group_value(self, group: str, name: str, value: Any) -> None:
        self._data.setdefault(group, {})[name] = value

    @property
    def data(self) -> dict:
        return self._data

    @property
    def domain(self) -> tuple[float, float]:
        lo, hi = (parse_length(v) for v in self._get_group_value("system", "domain"))
        return lo, hi

    def _bc(self, side: str) -> tuple[float, float, float]:
        doc = self._get_group_value("system", side, {})
        return float(doc.get("c", 1.0)), float(doc.get("d", 0.0)), float(doc.get("r", 0.0))

    @property
    def system(self) -> PdeSystem:
        domain = self.domain
        sensors = self.sensors
        c = sensors.shapes() if sensors is not None else self._sensor_shapes(domain)
        get = self._get_group_value
        return validate_system(
            PdeSystem(
                a1=float(get("system", "a1")),
                a2=float(get("system", "a2")),
                a3=float(get("system", "a3")),
                k_u=float(get("system", "k_u")),
                k_y=float(get("system", "k_y")),
                b_u=tuple(parse_shape(doc, domain) for doc in get("system", "b_u")),
                c=c,
                domain=domain,
                bc=BoundaryConditions(*self._bc("left"), *self._bc("right")),
                x0=parse_shape(get("system", "x0"), domain),
            )
        )

    def _sensor_shapes(self, domain) -> tuple:
        shapes = self._get_group_value("sensors", "shapes")
        if not shapes:
            raise ValidationError("no sensors configured")
        return tuple(parse_shape(doc, domain) for doc in shapes)

    @property
    def u(self):
        return self._get_group_value("system", "u", 1.0)

    @property
    def sensors(self) -> SensorArray | None:
        """Point sensors from ``positions`` or ``uniform``; ``None`` for distributed shapes."""
        uniform = self._get_group_value("sensors", "uniform")
        if uniform:
            return place_sensors_uniform(int(uniform), self.domain)
        positions = self._get_group_value("sensors", "positions")
        if positions and not self._get_group_value("sensors", "shapes"):
            return SensorArray(tuple(parse_length(p) for p in positions), self.domain)
        return None

    @property
    def source(self) -> SourceModel:
        get = self._get_group_value
        kind = get("source", "kind", MODAL_STEP)
        if kind not in KINDS:
            raise ValidationError(f"unknown source kind {kind!r}")
        domain = self.domain
        if kind == ZERO:
            return SourceModel(ZERO, domain=domain)
        if kind == SEPARABLE_WINDOW:
            window = tuple(parse_length(v) for v in get("source", "window", [0.0, "pi/4"]))
            return SourceModel(
                SEPARABLE_WINDOW,
                (float(get("source", "onset", 10.0)),),
                (float(get("source", "amplitude", 2.0)),),
                window=window,
                domain=domain,
            )
        modes = [int(j) for j in get("source", "modes", [1, 2])]
        basis = tuple(SineMode(j, domain) for j in modes)
        rates = ()
        if kind == MODAL_INCIPIENT:
            rates = tuple(float(r) for r in get("source", "rates", []))
        return SourceModel(
            kind,
            tuple(float(t) for t in get("source", "onsets")),
            tuple(float(a) for a in get("source", "amplitudes")),
            rates,
            basis=basis,
            domain=domain,
        )

    @property
    def m(self) -> int:
        value = int(self._get_group_value("observer", "m", 2))
        if value < 1:
            raise ValidationError(f"m must be positive, got {value}")
        return value

    @property
    def k(self) -> int:
        value = int(self._get_group_value("observer", "k", 2 * self.m))
        if value < 1:
            raise ValidationError(f"k must be positive, got {value}")
        return value

    @property
    def gamma(self) -> np.ndarray:
        value = self._get_group_value("observer", "gamma", 100.0)
        if isinstance(value, (list, tuple)):
            if len(value) != self.m:
                raise ValidationError(f"gamma lists {len(value)} entries for m = {self.m}")
            return np.diag([float(v) for v in value])
        return float(value) * np.eye(self.m)

    @property
    def sigma(self) -> float:
        value = float(self._get_group_value("observer", "sigma", 1.0))
        if value <= 0.0:
            raise ValidationError(f"sigma must be positive, got {value}")
        return value

    @property
    def gains_mode(self) -> str:
        value = str(self._get_group_value("design", "gains", "pin-published"))
        if value not in GAIN_MODES:
            raise ValidationError(f"design.gains must be one of {GAIN_MODES}, got {value!r}")
        return value

    @property
    def pin_file(self) -> Path | None:
        value = self._get_group_value("design", "pin_file")
        if value is None:
            return None
        path = Path(value)
        if not path.is_absolute() and self.source_path is not None:
            path = self.source_path.parent / path
        return path

    @property
    def mu1(self) -> float:
        return float(self._get_group_value("design", "mu1", 1.0))

    @property
    def mu2(self) -> float:
        return float(self._get_group_value("design", "mu2", 1.0))

    @property
    def trace_p(self) -> float:
        return float(self._get_group_value("design", "trace_p", 0.25))

    @property
    def epsilon1(self) -> float | None:
        value = self._get_group_value("design", "epsilon1", "variable")
        return None if value == "variable" else float(value)

    @property
    def seed(self) -> int:
        return int(self._get_group_value("design", "seed", 0))

    @property
    def method(self) -> str:
        return str(self._get_group_value("design", "method", "sdp"))

    @property
    def dt(self) -> float:
        value = float(self._get_group_value("run", "dt", 0.01))
        if value <= 0.0:
            raise ValidationError(f"dt must be positive, got {value}")
        return value

    @property
    def horizon(self) -> float:
        return float(self._get_group_value("run", "horizon", 80.0))

    @property
    def nodes(self) -> int:
        value = int(self._get_group_value("run", "nodes", 201))
        if value < MIN_NODES or value % 2 == 0:
            raise ValidationError(f"nodes must be odd and at least {MIN_NODES}, got {value}")
        return value

    @property
    def eigensolver(self) -> str:
        return str(self._get_group_value("run", "eigensolver", "auto"))

    @property
    def out(self) -> Path:
        return Path(self._get_group_value("run", "out", "out"))

    def override(self, group: str, name: str, value: Any) -> None:
        if value is not None:
            self._set_group_value(group, name, value)

    def __str__(self) -> str:
        return str(self._data)
