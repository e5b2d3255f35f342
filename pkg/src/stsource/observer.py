# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Adaptive observer with a derivative-free source estimate.

The observer runs the slow model corrected by the output error ``e_y = C_s x_hat - y`` and
feeds it the source estimate ``f_hat_s = -Gamma F (e_y + sigma * integral of e_y)``.

>>> gains = GainSet(np.eye(2), np.eye(2), np.eye(2), 1.0)
>>> e_y = np.array([1.0, 0.0])
>>> (source_estimate_pi(e_y, e_y, gains) + 0.0).tolist()
[-2.0, 0.0]
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ValidationError
from .pde_core import SpatioTemporalField
from .reduction import ReducedSystem

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6
# Largest |lambda dt| kept per classical Runge-Kutta step.
RK4_REACH = 2.0


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GainSet:
    L: np.ndarray
    F: np.ndarray
    Gamma: np.ndarray
    sigma: float

    def __post_init__(self):
        L, F = np.atleast_2d(_frozen(self.L)), np.atleast_2d(_frozen(self.F))
        gamma = np.atleast_2d(_frozen(self.Gamma))
        if L.shape != F.shape:
            raise ValidationError(f"L {L.shape} and F {F.shape} must have the same shape")
        if gamma.shape != (L.shape[0], L.shape[0]):
            raise ValidationError(f"Gamma must be {L.shape[0]}x{L.shape[0]}, got {gamma.shape}")
        if not np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-12):
            raise ValidationError("Gamma must be symmetric")
        if np.min(np.linalg.eigvalsh(gamma)) <= 0.0:
            raise ValidationError("Gamma must be positive definite")
        if not self.sigma > 0.0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "Gamma", gamma)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def m(self) -> int:
        return self.L.shape[0]

    @property
    def n_y(self) -> int:
        return self.L.shape[1]


@dataclass(frozen=True)
class ObserverState:
    x_hat: np.ndarray
    ey_integral: np.ndarray
    t: float = 0.0

    @classmethod
    def initial(cls, m: int, n_y: int, x_hat0=None, t0: float = 0.0) -> "ObserverState":
        x_hat = np.zeros(m) if x_hat0 is None else np.asarray(x_hat0, dtype=float)
        return cls(_frozen(x_hat), _frozen(np.zeros(n_y)), float(t0))


@dataclass(frozen=True)
class ObserverTrajectory:
    t_grid: np.ndarray
    x_hat: np.ndarray
    y_hat: np.ndarray
    e_y: np.ndarray
    f_hat_s: np.ndarray
    f_hat: SpatioTemporalField | None = None

    def __post_init__(self):
        n = len(self.t_grid)
        if any(len(series) != n for series in (self.x_hat, self.y_hat, self.e_y, self.f_hat_s)):
            raise ValidationError("trajectory series must share the time grid")


def _check_dimensions(red: ReducedSystem, gains: GainSet) -> None:
    if gains.m != red.m or gains.n_y != red.n_y:
        raise ValidationError(
            f"gains are {gains.m}x{gains.n_y} but the slow model is {red.m}x{red.n_y}"
        )


def source_estimate_pi(ey_now, ey_integral, gains: GainSet) -> np.ndarray:
    ey_now = np.asarray(ey_now, dtype=float)
    ey_integral = np.asarray(ey_integral, dtype=float)
    if ey_now.shape != (gains.n_y,) or ey_integral.shape != (gains.n_y,):
        raise ValidationError(f"output errors must have {gains.n_y} entries")
    return -gains.Gamma @ gains.F @ (ey_now + gains.sigma * ey_integral)


def observer_step(
    state: ObserverState,
    y_meas,
    u,
    red: ReducedSystem,
    gains: GainSet,
    dt: float,
    y_next=None,
    step: int | None = None,
) -> ObserverState:
    """One classical Runge-Kutta step over ``[t, t + dt]``.

    ``y_meas`` is the measurement at ``t``; with ``y_next`` (at ``t + dt``) the measurement is
    linearly interpolated inside the step, otherwise it is held. ``u`` is held. The error
    integral is part of the Runge-Kutta state, so every stage sees its own running integral.
    """
    if dt <= 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    y0 = np.asarray(y_meas, dtype=float)
    y1 = y0 if y_next is None else np.asarray(y_next, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    drive = red.B_us @ u

    def rhs(x_hat, integral, tau):
        e_y = red.C_s @ x_hat - (y0 + (tau / dt) * (y1 - y0))
        f_hat = source_estimate_pi(e_y, integral, gains)
        return red.A_s @ x_hat + drive + f_hat - gains.L @ e_y, e_y

    x, integral = state.x_hat, state.ey_integral
    k1, q1 = rhs(x, integral, 0.0)
    k2, q2 = rhs(x + 0.5 * dt * k1, integral + 0.5 * dt * q1, 0.5 * dt)
    k3, q3 = rhs(x + 0.5 * dt * k2, integral + 0.5 * dt * q2, 0.5 * dt)
    k4, q4 = rhs(x + dt * k3, integral + dt * q3, dt)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    integral = integral + (dt / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)

    if not np.all(np.isfinite(x_next)) or np.linalg.norm(x_next) > DIVERGENCE_LIMIT:
        index = int(round((state.t + dt) / dt)) if step is None else step
        raise DivergenceError("observer state diverged", index)
    return ObserverState(_frozen(x_next), _frozen(integral), state.t + dt)


def stable_substeps(red: ReducedSystem, gains: GainSet, dt: float) -> int:
    """Runge-Kutta substeps per sample that keep the closed loop inside the stability region."""
    pi_gain = gains.Gamma @ gains.F
    loop = np.block(
        [
            [red.A_s - (gains.L + pi_gain) @ red.C_s, -gains.sigma * pi_gain],
            [red.C_s, np.zeros((red.n_y, red.n_y))],
        ]
    )
    radius = float(np.max(np.abs(np.linalg.eigvals(loop))))
    return max(1, math.ceil(radius * dt / RK4_REACH))


def run_identification(
    y_series, u_series, red: ReducedSystem, gains: GainSet, dt: float, x_hat0=None, t0=0.0
) -> ObserverTrajectory:
    """Run the observer over sampled measurements and record its estimates at every sample.

    Samples are split into equal Runge-Kutta substeps when the closed loop is too fast for
    ``dt``; measurements are interpolated linearly across the substeps.
    """
    _check_dimensions(red, gains)
    y_series = np.asarray(y_series, dtype=float).reshape(-1, red.n_y)
    u_series = np.asarray(u_series, dtype=float).reshape(y_series.shape[0], -1)
    n = y_series.shape[0]
    t_grid = t0 + dt * np.arange(n)
    substeps = stable_substeps(red, gains, dt)
    if substeps > 1:
        logger.debug("observer uses %d substeps per sample", substeps)
    h = dt / substeps

    state = ObserverState.initial(red.m, red.n_y, x_hat0, t0)
    x_hat = np.empty((n, red.m))
    e_y = np.empty((n, red.n_y))
    f_hat_s = np.empty((n, red.m))
    for k in range(n):
        x_hat[k] = state.x_hat
        e_y[k] = red.C_s @ state.x_hat - y_series[k]
        f_hat_s[k] = source_estimate_pi(e_y[k], state.ey_integral, gains)
        if k + 1 == n:
            break
        slope = (y_series[k + 1] - y_series[k]) / substeps
        for j in range(substeps):
            y_a = y_series[k] + j * slope
            state = observer_step(state, y_a, u_series[k], red, gains, h, y_a + slope, k + 1)
    logger.info("identification finished over %d samples", n)
    return ObserverTrajectory(t_grid, x_hat, x_hat @ red.C_s.T, e_y, f_hat_s)


def synthesize_source(traj: ObserverTrajectory, phi_s, z_grid) -> SpatioTemporalField:
    """``f_hat(z, t) = phi_s(z)' f_hat_s(t)`` on ``z_grid``."""
    z_grid = np.asarray(z_grid, dtype=float)
    basis = np.vstack([np.broadcast_to(phi(z_grid), z_grid.shape) for phi in phi_s])
    if basis.shape[0] != traj.f_hat_s.shape[1]:
        raise ValidationError("basis size does not match the estimated coefficients")
    return SpatioTemporalField(z_grid, traj.t_grid, traj.f_hat_s @ basis)
