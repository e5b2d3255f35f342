# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Eigenpairs of the spatial operator ``a1 d/dz + a2 d2/dz2 + a3`` and the slow/fast split.

>>> [pair.lam for pair in dirichlet_eigenpairs(2.0, 3)]
[-3.0, -6.0, -11.0]
>>> round(spectral_gap(dirichlet_eigenpairs(2.0, 4), 2).epsilon, 3)
0.273
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from .errors import SpectrumError, ValidationError
from .pde_core import (
    GridFunction,
    PdeSystem,
    QuadratureRule,
    SineMode,
    inner_product,
    validate_system,
)

logger = logging.getLogger(__name__)

DEFAULT_EIGEN_NODES = 401
DEFAULT_PROJECTION_NODES = 201
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class EigenPair:
    lam: float
    phi: object
    index: int


@dataclass(frozen=True)
class SpectrumPartition:
    """First ``m`` eigenpairs (slow) and the ``k`` that follow them (fast head)."""

    slow: tuple[EigenPair, ...]
    fast_head: tuple[EigenPair, ...]
    m: int
    epsilon: float

    @property
    def k(self) -> int:
        return len(self.fast_head)

    @property
    def slow_eigenvalues(self) -> np.ndarray:
        return np.array([pair.lam for pair in self.slow], dtype=float)

    @property
    def fast_eigenvalues(self) -> np.ndarray:
        return np.array([pair.lam for pair in self.fast_head], dtype=float)

    @property
    def phi_s(self) -> list:
        return [pair.phi for pair in self.slow]

    @property
    def phi_f(self) -> list:
        return [pair.phi for pair in self.fast_head]


def _is_canonical_rod(sys: PdeSystem, beta_u: float) -> bool:
    bc = sys.bc
    return (
        sys.a1 == 0.0
        and sys.a2 == 1.0
        and sys.a3 == -beta_u
        and bc.left_is_dirichlet
        and bc.right_is_dirichlet
        and bc.homogeneous
        and np.allclose(sys.domain, (0.0, np.pi), rtol=0.0, atol=1e-12)
    )


def dirichlet_eigenpairs(
    beta_u: float, count: int, system: PdeSystem | None = None
) -> list[EigenPair]:
    """Closed-form eigenpairs ``-j**2 - beta_u`` and ``sqrt(2/pi) sin(j z)`` on ``[0, pi]``."""
    if count < 1:
        raise ValidationError(f"count must be positive, got {count}")
    if system is not None and not _is_canonical_rod(system, float(beta_u)):
        raise ValidationError(
            "analytic eigenpairs need a1=0, a2=1, a3=-beta_U and homogeneous Dirichlet on [0, pi]"
        )
    domain = (0.0, float(np.pi))
    return [
        EigenPair(lam=float(-(j**2) - beta_u), phi=SineMode(j, domain), index=j)
        for j in range(1, count + 1)
    ]


def difference_operator(sys: PdeSystem, nodes: np.ndarray) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Central-difference operator on every node and the constant boundary load.

    Robin ends use a ghost node from the discretized condition ``c x + d x' = r``. Dirichlet
    rows are left empty; callers impose the boundary value themselves.
    """
    n = nodes.size
    h = nodes[1] - nodes[0]
    a1, a2, a3 = sys.a1, sys.a2, sys.a3
    lower = a2 / h**2 - a1 / (2.0 * h)
    upper = a2 / h**2 + a1 / (2.0 * h)
    diag = np.full(n, -2.0 * a2 / h**2 + a3)
    sub = np.full(n - 1, lower)
    sup = np.full(n - 1, upper)
    load = np.zeros(n)
    bc = sys.bc
    if bc.left_is_dirichlet:
        diag[0], sup[0] = 0.0, 0.0
    else:
        diag[0] += lower * 2.0 * h * bc.c1 / bc.d1
        sup[0] += lower
        load[0] = -lower * 2.0 * h * bc.r1 / bc.d1
    if bc.right_is_dirichlet:
        diag[-1], sub[-1] = 0.0, 0.0
    else:
        diag[-1] -= upper * 2.0 * h * bc.c2 / bc.d2
        sub[-1] += upper
        load[-1] = upper * 2.0 * h * bc.r2 / bc.d2
    return sparse.diags([sub, diag, sup], [-1, 0, 1], format="csr"), load


def unknown_nodes(sys: PdeSystem, n_nodes: int) -> np.ndarray:
    """Indices of the nodes not fixed by a Dirichlet condition."""
    first = 1 if sys.bc.left_is_dirichlet else 0
    last = n_nodes - 1 if sys.bc.right_is_dirichlet else n_nodes
    return np.arange(first, last)


def _operator_matrix(sys: PdeSystem, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    unknown = unknown_nodes(sys, nodes.size)
    full = difference_operator(sys, nodes)[0].toarray()
    return full[np.ix_(unknown, unknown)], unknown


def _sorted_spectrum(matrix: np.ndarray, vectors: bool):
    if vectors:
        values, vecs = linalg.eig(matrix)
    else:
        values, vecs = linalg.eigvals(matrix), None
    order = np.argsort(-values.real, kind="stable")
    return values[order], None if vecs is None else vecs[:, order]


def _check_real(values: np.ndarray) -> None:
    scale = np.maximum(1.0, np.abs(values))
    if np.any(np.abs(values.imag) > IMAG_TOL * scale):
        raise SpectrumError("complex eigenvalues: the operator is not self-adjoint")


def _fix_sign(values: np.ndarray) -> np.ndarray:
    significant = np.flatnonzero(np.abs(values) > 1e-3 * np.max(np.abs(values)))
    if significant.size and values[significant[0]] < 0.0:
        return -values
    return values


def numeric_eigenpairs(
    sys: PdeSystem, count: int, n_nodes: int = DEFAULT_EIGEN_NODES
) -> list[EigenPair]:
    """Finite-difference eigenpairs, sorted by descending real part.

    Eigenvalues are Richardson-extrapolated from the grid and its bisection; eigenvectors come
    from the base grid, normalized with Simpson's rule and signed so that the first significant
    sample next to the left end is positive.
    """
    validate_system(sys)
    if not sys.bc.homogeneous:
        raise ValidationError("inhomogeneous BCs: eigenpairs need r1 = r2 = 0")
    if count < 1 or count > n_nodes // 4:
        raise ValidationError(f"count {count} exceeds the resolution limit of {n_nodes // 4}")
    if sys.a1 != 0.0:
        logger.warning("a1 != 0: eigenfunctions are not orthogonal in the plain L2 product")

    rule = QuadratureRule.from_domain(sys.domain, n_nodes)
    coarse, unknown = _operator_matrix(sys, rule.nodes)
    coarse_values, vectors = _sorted_spectrum(coarse, vectors=True)
    fine_nodes = np.linspace(*sys.domain, 2 * n_nodes - 1)
    fine_values, _ = _sorted_spectrum(_operator_matrix(sys, fine_nodes)[0], vectors=False)
    _check_real(coarse_values[:count])
    _check_real(fine_values[:count])
    extrapolated = (4.0 * fine_values[:count].real - coarse_values[:count].real) / 3.0
    logger.debug(
        "richardson corrections %s", np.abs(extrapolated - coarse_values[:count].real)
    )

    pairs = []
    for j in range(count):
        samples = np.zeros(rule.nodes.size)
        samples[unknown] = vectors[:, j].real
        samples = _fix_sign(samples / np.sqrt(rule.integrate(samples**2)))
        phi = GridFunction(rule.nodes, samples)
        pairs.append(EigenPair(lam=float(extrapolated[j]), phi=phi, index=j + 1))
    return pairs


def system_eigenpairs(sys: PdeSystem, count: int, method: str = "auto") -> list[EigenPair]:
    """Eigenpairs by the closed form when the system is the canonical rod, numerically otherwise."""
    if method not in ("auto", "analytic", "numeric"):
        raise ValidationError(f"unknown eigensolver {method!r}")
    beta_u = -sys.a3
    if method == "analytic" or (method == "auto" and _is_canonical_rod(sys, beta_u)):
        return dirichlet_eigenpairs(beta_u, count, system=sys)
    return numeric_eigenpairs(sys, count)


def project_onto_modes(profile, basis, rule: QuadratureRule | None = None) -> np.ndarray:
    if not basis:
        raise ValidationError("empty modal basis")
    phis = [pair.phi if isinstance(pair, EigenPair) else pair for pair in basis]
    if rule is None:
        rule = QuadratureRule.from_domain(phis[0].domain, DEFAULT_PROJECTION_NODES)
    return np.array([inner_product(profile, phi, rule) for phi in phis])


def spectral_gap(eigs, m: int, k: int | None = None) -> SpectrumPartition:
    eigs = list(eigs)
    if m < 1:
        raise ValidationError(f"slow order m must be positive, got {m}")
    if len(eigs) < m + 1:
        raise ValidationError(f"need at least {m + 1} eigenpairs, got {len(eigs)}")
    k = 2 * m if k is None else int(k)
    if k < 1:
        raise ValidationError(f"fast head size k must be positive, got {k}")
    if m + k > len(eigs):
        logger.debug("fast head truncated from %d to %d modes", k, len(eigs) - m)
        k = len(eigs) - m
    lam1, lam_next = np.real(eigs[0].lam), np.real(eigs[m].lam)
    if lam_next >= 0.0:
        raise SpectrumError(f"unstable fast spectrum: Re lambda_{m + 1} = {lam_next:g}")
    epsilon = abs(lam1) / abs(lam_next)
    if epsilon >= 1.0:
        raise SpectrumError(f"no spectral gap after mode {m}: epsilon = {epsilon:g}")
    return SpectrumPartition(tuple(eigs[:m]), tuple(eigs[m : m + k]), m, float(epsilon))
