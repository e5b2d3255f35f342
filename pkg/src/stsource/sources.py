# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Abnormal spatio-temporal source models.

Modal kinds compose the given basis shapes with per-mode temporal amplitudes; the separable
kind multiplies a Heaviside window by a step in time.

>>> model = abrupt_source()
>>> model.amplitudes_at(np.array([5.0, 50.0])).tolist()
[[0.0, 0.0], [2.0, 3.0]]
>>> float(incipient_source().amplitudes_at(np.array([10.0]))[0, 0])
1.0
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .pde_core import QuadratureRule, SineMode, sample_profile, window_profile

logger = logging.getLogger(__name__)

MODAL_STEP = "modal-step"
MODAL_INCIPIENT = "modal-incipient"
SEPARABLE_WINDOW = "separable-window"
ZERO = "zero"
KINDS = (MODAL_STEP, MODAL_INCIPIENT, SEPARABLE_WINDOW, ZERO)

ROD_DOMAIN = (0.0, math.pi)


@dataclass(frozen=True)
class SourceModel:
    kind: str
    onsets: tuple = ()
    amplitudes: tuple = ()
    rates: tuple = ()
    window: tuple | None = None
    basis: tuple = ()
    domain: tuple = ROD_DOMAIN

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown source kind {self.kind!r}")
        for name in ("onsets", "amplitudes", "rates", "basis"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        values = np.array(self.onsets + self.amplitudes + self.rates, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValidationError("source parameters must be finite")
        if any(t < 0.0 for t in self.onsets):
            raise ValidationError("onset times must be nonnegative")
        if len(self.onsets) != len(self.amplitudes):
            raise ValidationError("one amplitude per onset is required")
        if self.kind in (MODAL_STEP, MODAL_INCIPIENT) and len(self.basis) != len(self.onsets):
            raise ValidationError("modal sources need one basis shape per onset")
        if self.kind == MODAL_INCIPIENT and len(self.rates) != len(self.onsets):
            raise ValidationError("incipient sources need one rate per onset")
        if self.kind == SEPARABLE_WINDOW:
            if self.window is None or len(self.onsets) != 1:
                raise ValidationError("a window source needs a window and a single onset")
            object.__setattr__(self, "window", tuple(float(v) for v in self.window))

    @property
    def separable(self) -> bool:
        return self.kind == SEPARABLE_WINDOW

    @property
    def shapes(self) -> tuple:
        """Spatial shapes matching the columns of :meth:`amplitudes_at`."""
        if self.kind == SEPARABLE_WINDOW:
            return (window_profile(*self.window, self.domain),)
        return self.basis

    def amplitudes_at(self, t) -> np.ndarray:
        """Temporal amplitudes, one row per time stamp and one column per shape."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == ZERO:
            return np.zeros((t.size, 0))
        onsets = np.asarray(self.onsets, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=float)
        active = t[:, None] >= onsets[None, :]
        if self.kind == MODAL_INCIPIENT:
            rates = np.asarray(self.rates, dtype=float)
            lag = np.maximum(t[:, None] - onsets[None, :], 0.0)
            return np.where(active, amps[None, :] - np.exp(-rates[None, :] * lag), 0.0)
        return np.where(active, amps[None, :], 0.0)

    def time_signal(self, t) -> np.ndarray:
        """The scalar ``f(t)`` of a separable source."""
        if not self.separable:
            raise ValidationError(f"a {self.kind} source is not separable")
        return self.amplitudes_at(t)[:, 0]

    def sample(self, z_grid, t_grid) -> np.ndarray:
        """``f(z, t)`` with one row per time stamp."""
        z_grid = np.asarray(z_grid, dtype=float)
        amps = self.amplitudes_at(t_grid)
        if not self.shapes:
            return np.zeros((amps.shape[0], z_grid.size))
        shapes = np.vstack(
            [np.broadcast_to(shape(z_grid), z_grid.shape) for shape in self.shapes]
        )
        return amps @ shapes

    def check_horizon(self, horizon: float) -> None:
        late = [t for t in self.onsets if t > horizon]
        if late:
            raise ValidationError(f"onset times {late} lie beyond the horizon {horizon}")


def eval_source(model: SourceModel, z_grid, t: float) -> np.ndarray:
    if t < 0.0:
        raise ValidationError(f"source evaluated at negative time {t}")
    if not isinstance(model, SourceModel):
        raise ValidationError(f"unknown source kind {type(model).__name__}")
    return model.sample(z_grid, [t])[0]


def zero_source(domain=ROD_DOMAIN) -> SourceModel:
    return SourceModel(ZERO, domain=tuple(domain))


def abrupt_source(
    onsets=(10.0, 40.0), amplitudes=(2.0, 3.0), domain=ROD_DOMAIN
) -> SourceModel:
    """Steps on the first modes: 2 from t=10 on mode 1, 3 from t=40 on mode 2."""
    basis = tuple(SineMode(j, tuple(domain)) for j in range(1, len(onsets) + 1))
    return SourceModel(MODAL_STEP, onsets, amplitudes, basis=basis, domain=tuple(domain))


def incipient_source(
    onsets=(10.0, 40.0), amplitudes=(2.0, 3.0), rates=(0.01, 0.02), domain=ROD_DOMAIN
) -> SourceModel:
    """Slow drifts ``a - exp(-r (t - t_on))`` on the first modes."""
    basis = tuple(SineMode(j, tuple(domain)) for j in range(1, len(onsets) + 1))
    return SourceModel(
        MODAL_INCIPIENT, onsets, amplitudes, rates, basis=basis, domain=tuple(domain)
    )


def window_source(
    window=(0.0, math.pi / 4), onset=10.0, amplitude=2.0, domain=ROD_DOMAIN
) -> SourceModel:
    """``f(t) b_f(z)`` with ``b_f`` the indicator of ``window`` and ``f`` a step."""
    return SourceModel(
        SEPARABLE_WINDOW, (onset,), (amplitude,), window=tuple(window), domain=tuple(domain)
    )


def window_coefficients(model: SourceModel, basis, rule: QuadratureRule) -> np.ndarray:
    """``<b_f, phi_j>`` for the shape of a separable source."""
    if not model.separable:
        raise ValidationError(f"a {model.kind} source is not separable")
    b_f = sample_profile(model.shapes[0], rule)
    return np.array([rule.integrate(b_f * sample_profile(phi, rule)) for phi in basis])
