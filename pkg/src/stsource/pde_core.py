# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Domain model of the 1-D parabolic system and the L2 geometry on its domain.

Spatial profiles are plain callables of ``z`` (vectorized over numpy arrays) or
arrays sampled on the nodes of a :class:`QuadratureRule`. Point sensors are kept
symbolic; an inner product against one evaluates the other argument at the sensor.

>>> rule = QuadratureRule.from_domain((0.0, np.pi), 201)
>>> phi1, phi2 = SineMode(1, (0.0, np.pi)), SineMode(2, (0.0, np.pi))
>>> round(inner_product(phi1, phi1, rule), 8), abs(round(inner_product(phi1, phi2, rule), 8))
(1.0, 0.0)
>>> round(inner_product(PointSensor(np.pi / 4), phi2, rule), 6)
0.797885
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import ValidationError

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]

_EDGE_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


def _check_domain(domain) -> tuple[float, float]:
    lo, hi = (float(v) for v in domain)
    if not lo < hi:
        raise ValidationError(f"empty domain: alpha1={lo} must be below alpha2={hi}")
    return lo, hi


@dataclass(frozen=True)
class BoundaryConditions:
    """Robin conditions ``c x + d x' = r`` at the left (1) and right (2) ends."""

    c1: float = 1.0
    d1: float = 0.0
    r1: float = 0.0
    c2: float = 1.0
    d2: float = 0.0
    r2: float = 0.0

    @classmethod
    def dirichlet(cls, left: float = 0.0, right: float = 0.0) -> "BoundaryConditions":
        return cls(1.0, 0.0, left, 1.0, 0.0, right)

    @property
    def left_is_dirichlet(self) -> bool:
        return self.d1 == 0.0

    @property
    def right_is_dirichlet(self) -> bool:
        return self.d2 == 0.0

    @property
    def homogeneous(self) -> bool:
        return self.r1 == 0.0 and self.r2 == 0.0


@dataclass(frozen=True)
class PointSensor:
    """Dirac sensor shape ``delta(z - position)``."""

    position: float


@dataclass(frozen=True)
class SineMode:
    """Normalized Dirichlet sine ``sqrt(2/L) sin(j pi (z - alpha1) / L)``."""

    index: int
    domain: tuple[float, float]
    scale: float = 1.0

    def __call__(self, z):
        lo, hi = self.domain
        length = hi - lo
        z = np.asarray(z, dtype=float)
        return self.scale * np.sqrt(2.0 / length) * np.sin(self.index * np.pi * (z - lo) / length)


@dataclass(frozen=True)
class WindowProfile:
    """Indicator of ``[start, stop]`` scaled by ``scale``.

    A node sitting exactly on an interior edge takes the mean of the one-sided limits;
    an edge on the domain boundary takes the inside value.

    >>> w = WindowProfile(0.0, 1.0, (0.0, 2.0))
    >>> w(np.array([0.0, 0.5, 1.0, 1.5])).tolist()
    [1.0, 1.0, 0.5, 0.0]
    """

    start: float
    stop: float
    domain: tuple[float, float]
    scale: float = 1.0

    def __post_init__(self):
        lo, hi = _check_domain(self.domain)
        if not self.start < self.stop:
            raise ValidationError(f"empty window [{self.start}, {self.stop}]")
        if self.stop <= lo or self.start >= hi:
            raise ValidationError("window lies outside the domain")

    @property
    def length(self) -> float:
        lo, hi = self.domain
        return min(self.stop, hi) - max(self.start, lo)

    def __call__(self, z):
        lo, hi = self.domain
        z = np.asarray(z, dtype=float)
        values = ((z > self.start) & (z < self.stop)).astype(float)
        for edge, at_boundary in ((self.start, self.start <= lo), (self.stop, self.stop >= hi)):
            on_edge = np.abs(z - edge) <= _EDGE_TOL * max(1.0, abs(edge))
            values[on_edge] = 1.0 if at_boundary else 0.5
        return self.scale * values


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 0.0

    def __call__(self, z):
        return np.full(np.shape(z), float(self.value))


@dataclass(frozen=True)
class GridFunction:
    """A sampled profile, evaluated off-grid by piecewise-linear interpolation."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = _frozen_array(self.nodes)
        values = _frozen_array(self.values)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValidationError("grid function needs matching 1-D nodes and values")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    def __call__(self, z):
        return np.interp(np.asarray(z, dtype=float), self.nodes, self.values)


def window_profile(start: float, stop: float, domain, scale: float = 1.0) -> WindowProfile:
    return WindowProfile(float(start), float(stop), _check_domain(domain), float(scale))


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Simpson rule on an odd number of monotone nodes."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = _frozen_array(self.nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValidationError("Simpson rule needs at least 3 nodes")
        if nodes.size % 2 == 0:
            raise ValidationError(f"Simpson rule needs an odd node count, got {nodes.size}")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValidationError("quadrature nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_domain(cls, domain, n_nodes: int) -> "QuadratureRule":
        lo, hi = _check_domain(domain)
        return cls(np.linspace(lo, hi, int(n_nodes)))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    def integrate(self, values, axis: int = -1):
        return simpson(np.asarray(values, dtype=float), x=self.nodes, axis=axis)


@dataclass(frozen=True)
class PdeSystem:
    """Coefficients of ``x_t = a1 x_z + a2 x_zz + a3 x + k_u b_u' u + f``.

    ``b_u`` and ``c`` hold one shape per input and per output; sensor shapes may be
    :class:`PointSensor` instances.
    """

    a1: float
    a2: float
    a3: float
    k_u: float
    k_y: float
    b_u: tuple
    c: tuple
    domain: tuple[float, float]
    bc: BoundaryConditions = field(default_factory=BoundaryConditions)
    x0: Profile = field(default_factory=ConstantProfile)

    def __post_init__(self):
        object.__setattr__(self, "b_u", tuple(self.b_u))
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))

    @property
    def n_u(self) -> int:
        return len(self.b_u)

    @property
    def n_y(self) -> int:
        return len(self.c)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


@dataclass(frozen=True)
class SpatioTemporalField:
    """Samples of a field, one row per time stamp and one column per spatial node."""

    z_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        z_grid, t_grid = _frozen_array(self.z_grid), _frozen_array(self.t_grid)
        values = _frozen_array(self.values)
        if values.shape != (t_grid.size, z_grid.size):
            raise ValidationError(
                f"field values {values.shape} do not match grids ({t_grid.size}, {z_grid.size})"
            )
        if np.any(np.diff(z_grid) <= 0.0) or np.any(np.diff(t_grid) < 0.0):
            raise ValidationError("field grids must be monotone")
        object.__setattr__(self, "z_grid", z_grid)
        object.__setattr__(self, "t_grid", t_grid)
        object.__setattr__(self, "values", values)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.z_grid[0]), float(self.z_grid[-1])

    def __sub__(self, other: "SpatioTemporalField") -> "SpatioTemporalField":
        if not (
            np.array_equal(self.z_grid, other.z_grid) and np.array_equal(self.t_grid, other.t_grid)
        ):
            raise ValidationError("cannot subtract fields sampled on different grids")
        return SpatioTemporalField(self.z_grid, self.t_grid, self.values - other.values)


def validate_system(sys: PdeSystem) -> PdeSystem:
    _check_domain(sys.domain)
    if not sys.a2 > 0.0:
        raise ValidationError(f"not parabolic: a2 must be positive, got {sys.a2}")
    bc = sys.bc
    if bc.c1 == 0.0 and bc.d1 == 0.0:
        raise ValidationError("degenerate left BC: c1 and d1 are both zero")
    if bc.c2 == 0.0 and bc.d2 == 0.0:
        raise ValidationError("degenerate right BC: c2 and d2 are both zero")
    if sys.n_u < 1:
        raise ValidationError("empty actuator shape list b_u")
    if sys.n_y < 1:
        raise ValidationError("empty sensor shape list c")
    lo, hi = sys.domain
    for shape in sys.c:
        if isinstance(shape, PointSensor) and not lo <= shape.position <= hi:
            raise ValidationError(f"point sensor at {shape.position} lies outside the domain")
    return sys


def _domain_of(profile):
    domain = getattr(profile, "domain", None)
    return None if domain is None else tuple(float(v) for v in domain)


def sample_profile(profile, rule: QuadratureRule) -> np.ndarray:
    """Values of ``profile`` on the nodes of ``rule``."""
    if isinstance(profile, PointSensor):
        raise ValidationError("a point sensor has no sampled values")
    domain = _domain_of(profile)
    if domain is not None and not np.allclose(domain, rule.domain, rtol=0.0, atol=1e-9):
        raise ValidationError(f"mismatched domains: {domain} vs {rule.domain}")
    if callable(profile):
        return np.broadcast_to(np.asarray(profile(rule.nodes), dtype=float), rule.nodes.shape)
    values = np.asarray(profile, dtype=float)
    if values.shape[-1] != rule.nodes.size:
        raise ValidationError(
            f"mismatched domains: {values.shape[-1]} samples for {rule.nodes.size} nodes"
        )
    return values


def _point_value(sensor: PointSensor, profile, rule: QuadratureRule) -> float:
    lo, hi = rule.domain
    if not lo <= sensor.position <= hi:
        raise ValidationError(f"point sensor at {sensor.position} lies outside the domain")
    if callable(profile) and not isinstance(profile, GridFunction):
        return float(np.asarray(profile(np.array([sensor.position])), dtype=float).ravel()[0])
    if isinstance(profile, GridFunction):
        return float(profile(sensor.position))
    return float(np.interp(sensor.position, rule.nodes, sample_profile(profile, rule)))


def inner_product(f, g, rule: QuadratureRule) -> float:
    f_point, g_point = isinstance(f, PointSensor), isinstance(g, PointSensor)
    if f_point and g_point:
        raise ValidationError("inner product of two point sensors is undefined")
    if f_point:
        return _point_value(f, g, rule)
    if g_point:
        return _point_value(g, f, rule)
    if isinstance(f, WindowProfile) and isinstance(g, WindowProfile):
        return _window_overlap(f, g, rule)
    return float(rule.integrate(sample_profile(f, rule) * sample_profile(g, rule)))


def _window_overlap(f: WindowProfile, g: WindowProfile, rule: QuadratureRule) -> float:
    """Exact integral of a product of two windows over their overlap."""
    for window in (f, g):
        if not np.allclose(window.domain, rule.domain, rtol=0.0, atol=1e-9):
            raise ValidationError(f"mismatched domains: {window.domain} vs {rule.domain}")
    lo, hi = rule.domain
    start = max(f.start, g.start, lo)
    stop = min(f.stop, g.stop, hi)
    return float(f.scale * g.scale * max(stop - start, 0.0))


def l2_norm_profile(f, rule: QuadratureRule) -> float:
    return float(np.sqrt(max(inner_product(f, f, rule), 0.0)))


def heat_rod(
    beta_u: float = 2.0,
    sensor_positions=(np.pi / 4, 3 * np.pi / 4),
    x0: Profile | None = None,
) -> PdeSystem:
    """The cooled thin rod ``x_t = x_zz + beta_U (b_u u - x) + f`` on ``[0, pi]``."""
    domain = (0.0, float(np.pi))
    phi1 = SineMode(1, domain)
    return validate_system(
        PdeSystem(
            a1=0.0,
            a2=1.0,
            a3=-float(beta_u),
            k_u=float(beta_u),
            k_y=1.0,
            b_u=(phi1,),
            c=tuple(PointSensor(float(p)) for p in sensor_positions),
            domain=domain,
            bc=BoundaryConditions.dirichlet(),
            x0=phi1 if x0 is None else x0,
        )
    )
