# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Galerkin truncation of the PDE onto its slow eigenfunctions.

The slow model is ``x_s' = A_s x_s + B_us u + f_s``, ``y_s = C_s x_s``; fast modes are
dropped (``x_f = 0``) and only kept as a diagnostic head for the truncation residual.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ValidationError
from .pde_core import (
    PdeSystem,
    QuadratureRule,
    SpatioTemporalField,
    inner_product,
    sample_profile,
    validate_system,
)
from .sources import SourceModel
from .spectral import DEFAULT_PROJECTION_NODES, SpectrumPartition

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-8


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ReducedSystem:
    A_s: np.ndarray
    B_us: np.ndarray
    C_s: np.ndarray
    phi_s: tuple
    m: int

    def __post_init__(self):
        for name in ("A_s", "B_us", "C_s"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "phi_s", tuple(self.phi_s))

    @property
    def n_y(self) -> int:
        return self.C_s.shape[0]

    @property
    def n_u(self) -> int:
        return self.B_us.shape[1]


@dataclass(frozen=True)
class ModalSourceSignal:
    t_grid: np.ndarray
    f_s: np.ndarray
    f_f_head: np.ndarray

    def __post_init__(self):
        for name in ("t_grid", "f_s", "f_f_head"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.t_grid.size
        if self.f_s.shape[0] != n or self.f_f_head.shape[0] != n:
            raise ValidationError("modal source series must match the time grid")


def numerical_rank(matrix: np.ndarray) -> int:
    """Rank with singular values above ``1e-8`` times the largest one."""
    singular = linalg.svdvals(np.atleast_2d(matrix))
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > RANK_RTOL * singular[0]))


def observability_matrix(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    blocks, block = [], np.asarray(C, dtype=float)
    for _ in range(A.shape[0]):
        blocks.append(block)
        block = block @ A
    return np.vstack(blocks)


def _galerkin(sys: PdeSystem, pairs, rule: QuadratureRule):
    phis = [pair.phi for pair in pairs]
    A = np.diag([float(np.real(pair.lam)) for pair in pairs])
    B = np.array([[sys.k_u * inner_product(b, phi, rule) for b in sys.b_u] for phi in phis])
    C = np.array([[sys.k_y * inner_product(c, phi, rule) for phi in phis] for c in sys.c])
    return A, B.reshape(len(phis), sys.n_u), C.reshape(sys.n_y, len(phis)), tuple(phis)


def _rule_for(sys: PdeSystem, rule: QuadratureRule | None) -> QuadratureRule:
    return rule or QuadratureRule.from_domain(sys.domain, DEFAULT_PROJECTION_NODES)


def build_slow_subsystem(
    sys: PdeSystem, partition: SpectrumPartition, rule: QuadratureRule | None = None
) -> ReducedSystem:
    validate_system(sys)
    A, B, C, phis = _galerkin(sys, partition.slow, _rule_for(sys, rule))
    m = partition.m
    if numerical_rank(C) < m:
        raise ValidationError(
            f"C_s is rank deficient: {sys.n_y} sensors do not resolve {m} slow modes"
        )
    if numerical_rank(observability_matrix(A, C)) < m:
        raise ValidationError("(A_s, C_s) is not observable")
    logger.debug("slow subsystem A_s=%s C_s=%s", np.diag(A), C.tolist())
    return ReducedSystem(A, B, C, phis, m)


def build_fast_head(
    sys: PdeSystem, partition: SpectrumPartition, rule: QuadratureRule | None = None
) -> ReducedSystem:
    """The retained fast modes as an unchecked modal system ``(A_f, B_uf, C_f)``."""
    if partition.k == 0:
        raise ValidationError("the partition retains no fast modes")
    A, B, C, phis = _galerkin(sys, partition.fast_head, _rule_for(sys, rule))
    return ReducedSystem(A, B, C, phis, partition.k)


def _field_coefficients(field: SpatioTemporalField, phis, rule: QuadratureRule) -> np.ndarray:
    if not np.allclose(field.z_grid, rule.nodes, rtol=0.0, atol=1e-12):
        rule = QuadratureRule(field.z_grid)
    columns = [
        rule.integrate(field.values * sample_profile(phi, rule)[None, :], axis=1) for phi in phis
    ]
    return np.column_stack(columns) if columns else np.zeros((field.t_grid.size, 0))


def _model_coefficients(model: SourceModel, t_grid, phis, rule: QuadratureRule) -> np.ndarray:
    amps = model.amplitudes_at(t_grid)
    if not phis:
        return np.zeros((amps.shape[0], 0))
    if not model.shapes:
        return np.zeros((amps.shape[0], len(phis)))
    shape_coeffs = np.array(
        [[inner_product(shape, phi, rule) for phi in phis] for shape in model.shapes]
    )
    return amps @ shape_coeffs


def modal_source_coefficients(
    source,
    partition: SpectrumPartition,
    t_grid=None,
    rule: QuadratureRule | None = None,
) -> ModalSourceSignal:
    """Projections of the source onto the slow modes and the retained fast modes.

    ``source`` is a sampled :class:`SpatioTemporalField` or a :class:`SourceModel`; a model
    needs ``t_grid``.
    """
    phis_s, phis_f = partition.phi_s, partition.phi_f
    if isinstance(source, SpatioTemporalField):
        rule = rule or QuadratureRule(source.z_grid)
        t_grid = source.t_grid
        f_s = _field_coefficients(source, phis_s, rule)
        f_f = _field_coefficients(source, phis_f, rule)
    elif isinstance(source, SourceModel):
        if t_grid is None:
            raise ValidationError("a source model needs a time grid")
        rule = rule or QuadratureRule.from_domain(source.domain, DEFAULT_PROJECTION_NODES)
        f_s = _model_coefficients(source, t_grid, phis_s, rule)
        f_f = _model_coefficients(source, t_grid, phis_f, rule)
    else:
        raise ValidationError(f"cannot project a {type(source).__name__}")
    return ModalSourceSignal(np.asarray(t_grid, dtype=float), f_s, f_f)


def zoh_matrices(red: ReducedSystem, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold transition ``(A_d, B_d)`` for the stacked input ``[u; f_s]``."""
    m, n_u = red.m, red.n_u
    n_in = n_u + m
    block = np.zeros((m + n_in, m + n_in))
    block[:m, :m] = red.A_s
    block[:m, m : m + n_u] = red.B_us
    block[:m, m + n_u :] = np.eye(m)
    transition = linalg.expm(block * dt)
    return transition[:m, :m], transition[:m, m:]


def simulate_slow_model(
    red: ReducedSystem, u_series, f_s_series, dt: float, x_s0=None
) -> tuple[np.ndarray, np.ndarray]:
    """Slow-model states and outputs under held inputs, one row per sample."""
    if dt <= 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    u_series = np.asarray(u_series, dtype=float).reshape(-1, red.n_u)
    f_s_series = np.asarray(f_s_series, dtype=float).reshape(-1, red.m)
    if u_series.shape[0] != f_s_series.shape[0]:
        raise ValidationError("input and source series differ in length")
    A_d, B_d = zoh_matrices(red, dt)
    inputs = np.hstack([u_series, f_s_series])
    x = np.zeros((inputs.shape[0], red.m))
    x[0] = np.zeros(red.m) if x_s0 is None else np.asarray(x_s0, dtype=float)
    for k in range(inputs.shape[0] - 1):
        x[k + 1] = A_d @ x[k] + B_d @ inputs[k]
    return x, x @ red.C_s.T


def output_peaks(y, y_s, dt: float) -> tuple[float, float]:
    """Peak norms of ``y_f = y - y_s`` and of its time derivative."""
    y_f = np.asarray(y, dtype=float) - np.asarray(y_s, dtype=float)
    if y_f.ndim == 1:
        y_f = y_f[:, None]
    dy_f = np.gradient(y_f, dt, axis=0) if y_f.shape[0] > 1 else np.zeros_like(y_f)
    return float(np.max(np.linalg.norm(y_f, axis=1))), float(np.max(np.linalg.norm(dy_f, axis=1)))


def source_energy_peak(f_field: SpatioTemporalField, rule: QuadratureRule | None = None) -> float:
    """``max_t ||f(., t)||_2**2`` over the sampled record."""
    rule = rule or QuadratureRule(f_field.z_grid)
    return float(np.max(rule.integrate(f_field.values**2, axis=1)))
