# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Crank-Nicolson forward solver for the full PDE and point-sensor sampling.

>>> place_sensors_uniform(3, (0.0, 4.0)).positions
(1.0, 2.0, 3.0)
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import DivergenceError, ValidationError
from .pde_core import (
    PdeSystem,
    PointSensor,
    QuadratureRule,
    SpatioTemporalField,
    sample_profile,
    validate_system,
)
from .sources import SourceModel
from .spectral import difference_operator

logger = logging.getLogger(__name__)

DEFAULT_NODES = 201
MIN_NODES = 51
BC_TOL = 1e-8


@dataclass(frozen=True)
class SensorArray:
    positions: tuple
    domain: tuple = (0.0, float(np.pi))
    kind: str = "point"

    def __post_init__(self):
        positions = tuple(float(p) for p in self.positions)
        lo, hi = (float(v) for v in self.domain)
        if not positions:
            raise ValidationError("a sensor array needs at least one position")
        if self.kind != "point":
            raise ValidationError(f"unsupported sensor kind {self.kind!r}")
        if any(not lo < p < hi for p in positions):
            raise ValidationError(f"sensor positions {positions} must lie inside ({lo}, {hi})")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValidationError("sensor positions must be strictly increasing")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def n_y(self) -> int:
        return len(self.positions)

    def shapes(self) -> tuple[PointSensor, ...]:
        return tuple(PointSensor(p) for p in self.positions)


@dataclass(frozen=True)
class SimulationResult:
    x: SpatioTemporalField
    y: np.ndarray
    f_true: SpatioTemporalField
    dt: float
    u: np.ndarray
    scheme: dict = field(default_factory=dict)

    @property
    def t_grid(self) -> np.ndarray:
        return self.x.t_grid


def place_sensors_uniform(n_y: int, domain) -> SensorArray:
    """Interior-uniform positions ``alpha1 + i L / (n_y + 1)``, ``i = 1..n_y``."""
    if n_y < 1:
        raise ValidationError(f"n_y must be positive, got {n_y}")
    lo, hi = (float(v) for v in domain)
    step = (hi - lo) / (n_y + 1)
    return SensorArray(tuple(lo + i * step for i in range(1, n_y + 1)), (lo, hi))


def sample_outputs(x: SpatioTemporalField, sensors: SensorArray, k_y: float = 1.0) -> np.ndarray:
    """``k_y x(z_i, t)`` by linear interpolation, one row per time stamp."""
    lo, hi = x.domain
    outside = [p for p in sensors.positions if not lo <= p <= hi]
    if outside:
        raise ValidationError(f"sensor positions {outside} lie outside the grid [{lo}, {hi}]")
    return k_y * np.column_stack([_interp_column(x, p) for p in sensors.positions])


def _interp_column(x: SpatioTemporalField, position: float) -> np.ndarray:
    z = x.z_grid
    i = int(np.clip(np.searchsorted(z, position, side="right") - 1, 0, z.size - 2))
    w = (position - z[i]) / (z[i + 1] - z[i])
    return (1.0 - w) * x.values[:, i] + w * x.values[:, i + 1]


def system_outputs(sys: PdeSystem, x: SpatioTemporalField) -> np.ndarray:
    """Outputs through the system's own sensor shapes, point or distributed."""
    rule = QuadratureRule(x.z_grid)
    columns = []
    for shape in sys.c:
        if isinstance(shape, PointSensor):
            column = _interp_column(x, shape.position)
        else:
            column = rule.integrate(x.values * sample_profile(shape, rule)[None, :], axis=1)
        columns.append(sys.k_y * column)
    return np.column_stack(columns)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    if dt <= 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if horizon <= 0.0:
        raise ValidationError(f"horizon must be positive, got {horizon}")
    steps = int(round(horizon / dt))
    if abs(steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        logger.warning("horizon %g is not a multiple of dt %g; using %d steps", horizon, dt, steps)
    return dt * np.arange(steps + 1)


def input_series(u, t_grid: np.ndarray, n_u: int) -> np.ndarray:
    """Samples of the manipulated input, one row per time stamp."""
    if callable(u):
        values = np.array([np.atleast_1d(u(t)) for t in t_grid], dtype=float)
    else:
        values = np.asarray(u, dtype=float)
        if values.ndim <= 1 and values.size in (1, n_u):
            values = np.broadcast_to(values.reshape(1, -1), (t_grid.size, values.size))
    values = np.broadcast_to(values.reshape(t_grid.size, -1), (t_grid.size, n_u))
    return np.array(values)


def source_field(source, z_grid: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    if source is None:
        return np.zeros((t_grid.size, z_grid.size))
    if isinstance(source, SourceModel):
        return source.sample(z_grid, t_grid)
    if callable(source):
        return np.array([np.broadcast_to(source(z_grid, t), z_grid.shape) for t in t_grid])
    raise ValidationError(f"unknown source kind {type(source).__name__}")


def _check_initial_profile(sys: PdeSystem, x0: np.ndarray) -> None:
    bc = sys.bc
    if bc.left_is_dirichlet and abs(bc.c1 * x0[0] - bc.r1) > BC_TOL:
        raise ValidationError("initial profile violates the left BC")
    if bc.right_is_dirichlet and abs(bc.c2 * x0[-1] - bc.r2) > BC_TOL:
        raise ValidationError("initial profile violates the right BC")


def simulate_forward(
    sys: PdeSystem,
    source=None,
    u=1.0,
    horizon: float = 80.0,
    dt: float = 0.01,
    n_nodes: int = DEFAULT_NODES,
    sensors: SensorArray | None = None,
) -> SimulationResult:
    """Advance ``x(z, t)`` with Crank-Nicolson and sample the outputs.

    ``source`` is a :class:`SourceModel`, a callable ``f(z, t)`` or ``None``; ``u`` is a
    callable of ``t``, a constant, or a sampled series. Outputs go through ``sensors`` when
    given, otherwise through the system's own sensor shapes.
    """
    validate_system(sys)
    if n_nodes < MIN_NODES or n_nodes % 2 == 0:
        raise ValidationError(f"n_nodes must be odd and at least {MIN_NODES}, got {n_nodes}")
    t_grid = time_grid(horizon, dt)
    if isinstance(source, SourceModel):
        source.check_horizon(t_grid[-1])
    rule = QuadratureRule.from_domain(sys.domain, n_nodes)
    z = rule.nodes

    f_values = source_field(source, z, t_grid)
    # the source load over [t_n, t_n+1) is its value at the step midpoint
    f_mid = source_field(source, z, t_grid[:-1] + 0.5 * dt)
    u_values = input_series(u, t_grid, sys.n_u)
    b_u = np.vstack([sample_profile(b, rule) for b in sys.b_u])
    u_loads = sys.k_u * (u_values @ b_u)
    loads = f_mid + 0.5 * (u_loads[:-1] + u_loads[1:])

    operator, boundary_load = difference_operator(sys, z)
    identity = sparse.identity(z.size, format="csr")
    # Dirichlet rows of the operator are empty, so these rows of lhs are identity rows.
    lhs = (identity - 0.5 * dt * operator).tocsc()
    rhs_matrix = (identity + 0.5 * dt * operator).tocsr()
    dirichlet = []
    bc = sys.bc
    if bc.left_is_dirichlet:
        dirichlet.append((0, bc.r1 / bc.c1))
    if bc.right_is_dirichlet:
        dirichlet.append((z.size - 1, bc.r2 / bc.c2))
    solver = splu(lhs)

    x = np.empty((t_grid.size, z.size))
    x[0] = sample_profile(sys.x0, rule)
    _check_initial_profile(sys, x[0])
    for n in range(t_grid.size - 1):
        rhs = rhs_matrix @ x[n] + dt * boundary_load + dt * loads[n]
        for row, value in dirichlet:
            rhs[row] = value
        x[n + 1] = solver.solve(rhs)
        if not np.all(np.isfinite(x[n + 1])):
            raise DivergenceError("non-finite state in the forward simulation", n + 1)

    x_field = SpatioTemporalField(z, t_grid, x)
    y = sample_outputs(x_field, sensors, sys.k_y) if sensors else system_outputs(sys, x_field)
    logger.info(
        "simulated %d steps on %d nodes (dt=%g, horizon=%g)",
        t_grid.size - 1,
        z.size,
        dt,
        t_grid[-1],
    )
    return SimulationResult(
        x=x_field,
        y=y,
        f_true=SpatioTemporalField(z, t_grid, f_values),
        dt=float(dt),
        u=u_values,
        scheme={"method": "crank-nicolson", "nodes": int(z.size), "dt": float(dt)},
    )
