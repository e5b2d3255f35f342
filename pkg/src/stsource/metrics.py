# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Identification error metrics.

``rmse`` integrates the squared error in space, averages it over every time sample and
normalizes by the domain length:

>>> z = np.linspace(0.0, np.pi, 201)
>>> phi1 = np.sqrt(2.0 / np.pi) * np.sin(z)
>>> round(rmse(SpatioTemporalField(z, [0.0, 1.0], [phi1, phi1])), 4)
0.5642
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .pde_core import QuadratureRule, SpatioTemporalField, inner_product, sample_profile
from .sources import SourceModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    ideal_rmse: float | None
    ef_norm: np.ndarray
    settle: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rmse >= 0.0:
            raise ValidationError(f"rmse must be nonnegative, got {self.rmse}")

    def rows(self) -> list[tuple[str, float]]:
        rows = [("rmse", self.rmse)]
        if self.ideal_rmse is not None:
            rows.append(("ideal_rmse", self.ideal_rmse))
        rows.append(("max_ef_norm", float(np.max(self.ef_norm))))
        rows.extend((f"settle_{name}", value) for name, value in sorted(self.settle.items()))
        return rows


def _rule(field_: SpatioTemporalField) -> QuadratureRule:
    if field_.values.size == 0:
        raise ValidationError("empty error field")
    return QuadratureRule(field_.z_grid)


def ef_norm(e_f: SpatioTemporalField) -> np.ndarray:
    """``||e_f(., t)||_2`` per time stamp."""
    rule = _rule(e_f)
    return np.sqrt(np.maximum(rule.integrate(e_f.values**2, axis=1), 0.0))


def rmse(e_f: SpatioTemporalField) -> float:
    rule = _rule(e_f)
    energy = rule.integrate(e_f.values**2, axis=1)
    return float(math.sqrt(max(float(np.mean(energy)), 0.0) / rule.length))


def _separable_parts(b_f, f_t, t_grid):
    if isinstance(b_f, SourceModel):
        if not b_f.separable:
            raise ValidationError(f"ideal RMSE needs a separable source, got {b_f.kind}")
        return b_f.shapes[0], b_f.time_signal(t_grid)
    if f_t is None:
        raise ValidationError("ideal RMSE needs the time signal f(t)")
    values = np.array([f_t(t) for t in t_grid]) if callable(f_t) else np.asarray(f_t, dtype=float)
    if values.shape != np.shape(t_grid):
        raise ValidationError("time signal does not match the time grid")
    return b_f, values


def ideal_rmse(phi_s, b_f, f_t, z_grid, t_grid) -> float:
    """RMSE of the best estimate inside ``span(phi_s)`` for a separable source ``f(t) b_f(z)``.

    The residual energy per unit ``f(t)**2`` is ``||b_f||**2 - sum_j <b_f, phi_j>**2``; windows
    integrate their own square exactly.
    """
    rule = QuadratureRule(np.asarray(z_grid, dtype=float))
    t_grid = np.asarray(t_grid, dtype=float)
    shape, signal = _separable_parts(b_f, f_t, t_grid)
    b_values = sample_profile(shape, rule)
    coeffs = np.array([rule.integrate(b_values * sample_profile(phi, rule)) for phi in phi_s])
    residual = max(inner_product(shape, shape, rule) - float(coeffs @ coeffs), 0.0)
    return float(math.sqrt(residual * float(np.mean(signal**2)) / rule.length))


def projection_residual_field(phi_s, b_f, f_t, z_grid, t_grid) -> SpatioTemporalField:
    """``(phi_s(z)' c - b_f(z)) f(t)`` with ``c`` the projections of ``b_f``."""
    rule = QuadratureRule(np.asarray(z_grid, dtype=float))
    t_grid = np.asarray(t_grid, dtype=float)
    shape, signal = _separable_parts(b_f, f_t, t_grid)
    b_values = sample_profile(shape, rule)
    basis = np.vstack([sample_profile(phi, rule) for phi in phi_s])
    coeffs = rule.integrate(basis * b_values[None, :], axis=1)
    residual = coeffs @ basis - b_values
    return SpatioTemporalField(rule.nodes, t_grid, np.outer(signal, residual))


def settle_times(t_grid, err_norm, onsets, band: float) -> dict[str, float]:
    """Per onset, the first time after which the error stays inside ``band``.

    The window of an onset ends at the next onset (or the end of the record); ``nan`` marks an
    error that never settles in its window.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    err_norm = np.asarray(err_norm, dtype=float)
    onsets = sorted(float(t) for t in onsets)
    result = {}
    for index, onset in enumerate(onsets):
        stop = onsets[index + 1] if index + 1 < len(onsets) else math.inf
        window = (t_grid >= onset) & (t_grid < stop)
        times, errors = t_grid[window], err_norm[window]
        outside = np.flatnonzero(errors > band)
        if outside.size == 0:
            settle = times[0] if times.size else math.nan
        elif outside[-1] + 1 < times.size:
            settle = times[outside[-1] + 1]
        else:
            settle = math.nan
        result[f"t{onset:g}"] = float(settle - onset) if math.isfinite(settle) else math.nan
    return result
