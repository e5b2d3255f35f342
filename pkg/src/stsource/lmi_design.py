# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Observer gain design by a linear matrix inequality, its certificate and the ultimate bound.

The decision variables are ``P, G1, G2`` (symmetric), ``X, F`` (``m x n_y``) and ``epsilon1``;
``Xi`` is the symmetric block matrix

    [[P A + A'P - X C - C'X',        *,                                   *         ],
     [(X C - P A) / sigma,           -2 P / sigma + G1 / (sigma mu1)
                                      + G2 / (sigma mu2),                 *         ],
     [X',                            F' - X' / sigma,                     -eps1 I   ]]

and a design is certified when ``Xi < 0``, ``P, G1, G2 > 0``, ``P = F C`` and ``X = P L``.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, optimize

from .errors import InfeasibleDesignError, ValidationError
from .observer import GainSet
from .reduction import ReducedSystem, numerical_rank

try:
    import cvxpy as cp
except ImportError:  # pragma: no cover
    cp = None

logger = logging.getLogger(__name__)

STRICT_TOLERANCES = {"tol_neg": 1e-8, "tol_pd": 1e-8, "tol_eq": 1e-6}
# Matrices printed to four decimals: lambda_max(Xi) up to 1e-3 is admitted.
PUBLISHED_TOLERANCES = {"tol_neg": -1e-3, "tol_pd": 1e-3, "tol_eq": 1e-3}

DEFAULT_DELTA = 1e-3
DEFAULT_TRACE_P = 0.25
DEFAULT_EPSILON1_MAX = 1e3
DEFAULT_COND_MAX = 100.0
DEFAULT_STARTS = 5
SYMMETRY_TOL = 1e-12


def _frozen(values) -> np.ndarray:
    array = np.atleast_2d(np.array(values, dtype=float))
    array.setflags(write=False)
    return array


def _sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _lam_max(matrix: np.ndarray) -> float:
    return float(linalg.eigvalsh(_sym(matrix))[-1])


def _lam_min(matrix: np.ndarray) -> float:
    return float(linalg.eigvalsh(_sym(matrix))[0])


@dataclass(frozen=True)
class DesignProblem:
    A_s: np.ndarray
    C_s: np.ndarray
    mu1: float = 1.0
    mu2: float = 1.0
    sigma: float = 1.0
    epsilon1: float | None = None

    def __post_init__(self):
        A, C = _frozen(self.A_s), _frozen(self.C_s)
        if A.shape[0] != A.shape[1] or C.shape[1] != A.shape[0]:
            raise ValidationError(f"A_s {A.shape} and C_s {C.shape} are not compatible")
        for name in ("mu1", "mu2", "sigma"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be positive")
        if self.epsilon1 is not None and not self.epsilon1 > 0.0:
            raise ValidationError("a fixed epsilon1 must be positive")
        object.__setattr__(self, "A_s", A)
        object.__setattr__(self, "C_s", C)

    @classmethod
    def from_reduced(cls, red: ReducedSystem, **kwargs) -> "DesignProblem":
        return cls(red.A_s, red.C_s, **kwargs)

    @property
    def m(self) -> int:
        return self.A_s.shape[0]

    @property
    def n_y(self) -> int:
        return self.C_s.shape[0]

    def to_dict(self) -> dict:
        return {
            "A_s": _matrix_doc(self.A_s),
            "C_s": _matrix_doc(self.C_s),
            "mu1": self.mu1,
            "mu2": self.mu2,
            "sigma": self.sigma,
            "epsilon1": self.epsilon1,
        }


@dataclass(frozen=True)
class DesignSolution:
    P: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    X: np.ndarray
    F: np.ndarray
    epsilon1: float
    L: np.ndarray
    eta: float
    problem: DesignProblem | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("P", "G1", "G2", "X", "F", "L"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "epsilon1", float(self.epsilon1))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def candidate(self) -> tuple:
        return self.P, self.G1, self.G2, self.X, self.F, self.epsilon1

    def gains(self, gamma, sigma: float | None = None) -> GainSet:
        if sigma is None:
            sigma = self.problem.sigma if self.problem else 1.0
        return GainSet(self.L, self.F, gamma, sigma)

    def scaled(self, c: float) -> "DesignSolution":
        return DesignSolution(
            c * self.P,
            c * self.G1,
            c * self.G2,
            c * self.X,
            c * self.F,
            c * self.epsilon1,
            self.L,
            c * self.eta,
            self.problem,
        )


@dataclass(frozen=True)
class BoundParams:
    f1: float
    f2: float
    yf_peak: float
    dyf_peak: float
    Gamma: np.ndarray

    def __post_init__(self):
        for name in ("f1", "f2", "yf_peak", "dyf_peak"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value >= 0.0):
                raise ValidationError(f"{name} must be finite and nonnegative, got {value}")
            object.__setattr__(self, name, value)
        gamma = _frozen(self.Gamma)
        if gamma.shape[0] != gamma.shape[1] or _lam_min(gamma) <= 0.0:
            raise ValidationError("Gamma must be square and positive definite")
        object.__setattr__(self, "Gamma", gamma)


@dataclass(frozen=True)
class CertificateReport:
    lambda_max_xi: float
    lambda_min_p: float
    lambda_min_g1: float
    lambda_min_g2: float
    eq_residual: float
    l_residual: float
    tolerances: dict
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        lines = [
            f"lambda_max(Xi)   {self.lambda_max_xi: .6e}",
            f"lambda_min(P)    {self.lambda_min_p: .6e}",
            f"lambda_min(G1)   {self.lambda_min_g1: .6e}",
            f"lambda_min(G2)   {self.lambda_min_g2: .6e}",
            f"||P - F C_s||    {self.eq_residual: .6e}",
            f"||X - P L||      {self.l_residual: .6e}",
        ]
        lines.append("PASS" if self.passed else "FAIL: " + "; ".join(self.failures))
        return lines


def assemble_xi(prob: DesignProblem, P, G1, G2, X, F, epsilon1) -> np.ndarray:
    A, C = prob.A_s, prob.C_s
    m, n_y = prob.m, prob.n_y
    P, G1, G2 = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (P, G1, G2))
    X, F = (np.asarray(v, dtype=float).reshape(m, n_y) for v in (X, F))
    for name, matrix in (("P", P), ("G1", G1), ("G2", G2)):
        if matrix.shape != (m, m):
            raise ValidationError(f"{name} must be {m}x{m}, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL:
            raise ValidationError(f"{name} is not symmetric")
    sigma, mu1, mu2 = prob.sigma, prob.mu1, prob.mu2
    xi11 = P @ A + A.T @ P - X @ C - C.T @ X.T
    xi21 = (X @ C - P @ A) / sigma
    xi22 = -(2.0 / sigma) * P + G1 / (sigma * mu1) + G2 / (sigma * mu2)
    xi31 = X.T
    xi32 = F.T - X.T / sigma
    xi33 = -float(epsilon1) * np.eye(n_y)
    xi = np.block([[xi11, xi21.T, xi31.T], [xi21, xi22, xi32.T], [xi31, xi32, xi33]])
    return _sym(xi)


def check_solution(
    prob: DesignProblem,
    sol: DesignSolution,
    tol_neg: float = 1e-8,
    tol_pd: float = 1e-8,
    tol_eq: float = 1e-6,
) -> CertificateReport:
    xi = assemble_xi(prob, *sol.candidate)
    report = {
        "lambda_max_xi": _lam_max(xi),
        "lambda_min_p": _lam_min(sol.P),
        "lambda_min_g1": _lam_min(sol.G1),
        "lambda_min_g2": _lam_min(sol.G2),
        "eq_residual": float(np.linalg.norm(sol.P - sol.F @ prob.C_s, 2)),
        "l_residual": float(np.linalg.norm(sol.X - sol.P @ sol.L, 2)),
    }
    failures = []
    if not report["lambda_max_xi"] <= -tol_neg:
        failures.append("Xi is not negative definite")
    for key, name in (("lambda_min_p", "P"), ("lambda_min_g1", "G1"), ("lambda_min_g2", "G2")):
        if not report[key] >= tol_pd:
            failures.append(f"{name} is not positive definite")
    if not report["eq_residual"] <= tol_eq:
        failures.append("P != F C_s")
    if not report["l_residual"] <= tol_eq:
        failures.append("X != P L")
    tolerances = {"tol_neg": tol_neg, "tol_pd": tol_pd, "tol_eq": tol_eq}
    return CertificateReport(**report, tolerances=tolerances, failures=tuple(failures))


def _upper_block(prob: DesignProblem, P, G1, G2, X, F) -> np.ndarray:
    size = 2 * prob.m
    return assemble_xi(prob, P, G1, G2, X, F, 1.0)[:size, :size]


def fit_epsilon1(prob: DesignProblem, P, G1, G2, X, F, margin: float = 0.5) -> float:
    """Smallest ``epsilon1`` with ``lambda_max(Xi) <= margin * lambda_max`` of the upper block.

    ``Xi`` decreases with ``epsilon1``, so its largest eigenvalue approaches that of the
    ``2m x 2m`` upper block from above; the root is bracketed on a log scale.
    """
    limit = _lam_max(_upper_block(prob, P, G1, G2, X, F))
    if limit >= 0.0:
        raise InfeasibleDesignError(
            "no epsilon1 certifies the design: the upper block is not negative definite",
            {"lambda_max_upper": limit},
        )
    target = margin * limit

    def excess(log_eps: float) -> float:
        return _lam_max(assemble_xi(prob, P, G1, G2, X, F, 10.0**log_eps)) - target

    lo, hi = -8.0, 8.0
    if excess(hi) > 0.0:
        logger.warning("epsilon1 reached its upper search bound 1e%g", hi)
        return 10.0**hi
    if excess(lo) <= 0.0:
        return 10.0**lo
    return float(10.0 ** optimize.brentq(excess, lo, hi, xtol=1e-10))


def _require_solvable(prob: DesignProblem) -> None:
    eye = np.eye(prob.m)
    hidden = [
        lam
        for lam in linalg.eigvals(prob.A_s)
        if lam.real >= 0.0 and numerical_rank(np.vstack([prob.A_s - lam * eye, prob.C_s])) < prob.m
    ]
    if hidden:
        raise InfeasibleDesignError(
            f"the unstable mode at {hidden[0].real:g} is unobservable through C_s",
            {"eigenvalue": float(hidden[0].real), "count": len(hidden)},
        )
    rank = numerical_rank(prob.C_s)
    if prob.n_y < prob.m or rank < prob.m:
        raise InfeasibleDesignError(
            "C_s is rank deficient, so P = F C_s cannot hold with P nonsingular",
            {"rank_C_s": rank, "m": prob.m},
        )


def _finish(prob, P, G1, G2, X, F, epsilon1, eta=None) -> DesignSolution:
    """Make ``P = F C_s`` exact with the smallest change of ``F``; recover ``L = P^-1 X``."""
    P, G1, G2 = _sym(P), _sym(G1), _sym(G2)
    F = F + (P - F @ prob.C_s) @ np.linalg.pinv(prob.C_s)
    L = linalg.solve(P, X, assume_a="sym")
    eta = float(np.linalg.norm(P - F @ prob.C_s, 2)) if eta is None else eta
    return DesignSolution(P, G1, G2, X, F, epsilon1, L, eta, prob)


def seed_design(prob: DesignProblem, trace_p: float = DEFAULT_TRACE_P) -> DesignSolution:
    """A closed-form feasible design for a full-column-rank ``C_s``.

    ``P = p I``, ``F = P C_s^+`` and ``X = P (A_s + sigma I) C_s^+`` give
    ``A_s - L C_s = -sigma I``; ``G1, G2`` are small multiples of ``P`` and ``epsilon1``
    follows from a Schur complement.
    """
    _require_solvable(prob)
    m, sigma = prob.m, prob.sigma
    p = trace_p / m
    P = p * np.eye(m)
    pinv = np.linalg.pinv(prob.C_s)
    X = P @ (prob.A_s + sigma * np.eye(m)) @ pinv
    F = P @ pinv
    G1 = 0.1 * p * prob.mu1 * np.eye(m)
    G2 = 0.1 * p * prob.mu2 * np.eye(m)
    if prob.epsilon1 is not None:
        epsilon1 = prob.epsilon1
    else:
        upper = _upper_block(prob, P, G1, G2, X, F)
        coupling = assemble_xi(prob, P, G1, G2, X, F, 1.0)[2 * m :, : 2 * m]
        epsilon1 = 2.0 * np.linalg.norm(coupling, 2) ** 2 / abs(_lam_max(upper))
    return _finish(prob, P, G1, G2, X, F, epsilon1)


class _Parameterization:
    """Maps a flat vector onto ``(P, G1, G2, X, F, epsilon1)`` with ``F = P C^+ + W N``.

    ``N`` spans the left null space of ``C_s``, so ``F C_s = P`` for every vector. Everything
    is linear, so ``Xi`` is ``xi0 + sum_k theta_k E_k`` with precomputed ``E_k``.
    """

    def __init__(self, prob: DesignProblem):
        self.prob = prob
        m, n_y = prob.m, prob.n_y
        self.pinv = np.linalg.pinv(prob.C_s)
        self.null = linalg.null_space(prob.C_s.T).T
        self.tri = np.triu_indices(m)
        n_sym = len(self.tri[0])
        self.sizes = [n_sym, n_sym, n_sym, m * n_y, m * self.null.shape[0]]
        self.free_eps = prob.epsilon1 is None
        self.dim = sum(self.sizes) + int(self.free_eps)
        zero = np.zeros(self.dim)
        self.xi0 = self._xi(zero)
        self.xi_basis = np.array([self._xi(e) - self.xi0 for e in np.eye(self.dim)])
        self.sym_basis = [
            np.array([self.unpack(e)[i] for e in np.eye(self.dim)]) for i in range(3)
        ]

    def _sym_from(self, values):
        m = self.prob.m
        upper = np.zeros((m, m))
        upper[self.tri] = values
        return upper + np.triu(upper, 1).T

    def unpack(self, theta):
        m, n_y = self.prob.m, self.prob.n_y
        parts = np.split(np.asarray(theta, dtype=float), np.cumsum(self.sizes))
        P, G1, G2 = (self._sym_from(parts[i]) for i in range(3))
        X = parts[3].reshape(m, n_y)
        W = parts[4].reshape(m, self.null.shape[0])
        F = P @ self.pinv + W @ self.null
        epsilon1 = parts[5][0] if self.free_eps else self.prob.epsilon1
        return P, G1, G2, X, F, epsilon1

    def pack(self, P, G1, G2, X, F, epsilon1):
        W = (F - P @ self.pinv) @ self.null.T
        parts = [P[self.tri], G1[self.tri], G2[self.tri], X.ravel(), W.ravel()]
        if self.free_eps:
            parts.append([epsilon1])
        return np.concatenate(parts)

    def _xi(self, theta):
        return assemble_xi(self.prob, *self.unpack(theta))

    def xi(self, theta):
        return self.xi0 + np.tensordot(theta, self.xi_basis, axes=1)


def _subgradient_start(
    param: _Parameterization, theta, delta: float, trace_p: float, max_iter: int
) -> tuple[float, np.ndarray]:
    best = (math.inf, theta)
    for iteration in range(max_iter):
        P, G1, G2, _, _, epsilon1 = param.unpack(theta)
        values, vectors = linalg.eigh(param.xi(theta))
        terms = [(values[-1] + delta, "xi", vectors[:, -1])]
        for index, matrix in enumerate((P, G1, G2)):
            lam, vec = linalg.eigh(matrix)
            terms.append((delta - lam[0], index, vec[:, 0]))
        if param.free_eps:
            terms.append((delta - epsilon1, "eps", None))
        value, which, vec = max(terms, key=lambda term: term[0])
        if value < best[0]:
            best = (value, theta.copy())
        if value <= 0.0:
            logger.debug("subgradient start feasible after %d iterations", iteration)
            break
        if which == "xi":
            grad = np.einsum("i,kij,j->k", vec, param.xi_basis, vec)
        elif which == "eps":
            grad = np.zeros(param.dim)
            grad[-1] = -1.0
        else:
            grad = -np.einsum("i,kij,j->k", vec, param.sym_basis[which], vec)
        norm2 = float(grad @ grad)
        if norm2 == 0.0:
            break
        theta = theta - (value + delta) / norm2 * grad
        if param.free_eps:
            trace = np.trace(param.unpack(theta)[0])
            if trace > 0.0:
                theta = theta * (trace_p / trace)
    return best


def _solve_subgradient(
    prob: DesignProblem, seed: int, starts: int, delta: float, trace_p: float, max_iter: int
) -> DesignSolution:
    param = _Parameterization(prob)
    origin = param.pack(*seed_design(prob, trace_p).candidate)
    scale = np.maximum(np.abs(origin), trace_p / prob.m)

    def run(index: int):
        rng = np.random.default_rng(seed + index)
        theta = origin if index == 0 else origin + 0.1 * scale * rng.standard_normal(param.dim)
        return _subgradient_start(param, theta, delta, trace_p, max_iter)

    with ThreadPoolExecutor(max_workers=starts) as pool:
        results = list(pool.map(run, range(starts)))
    best_index = min(range(starts), key=lambda i: (results[i][0], i))
    value, theta = results[best_index]
    if value > 0.0:
        raise InfeasibleDesignError(
            "subgradient search found no feasible design", {"best_objective": value}
        )
    logger.debug("subgradient best start %d with objective %.3e", best_index, value)
    return _finish(prob, *param.unpack(theta))


def _installed_solver() -> str:
    installed = cp.installed_solvers()
    return "CLARABEL" if "CLARABEL" in installed else "SCS"


def _solve_sdp(
    prob: DesignProblem,
    delta: float,
    trace_p: float,
    epsilon1_max: float,
    cond_max: float,
    x_weight: float,
) -> DesignSolution:
    A, C = prob.A_s, prob.C_s
    m, n_y = prob.m, prob.n_y
    sigma, mu1, mu2 = prob.sigma, prob.mu1, prob.mu2
    P = cp.Variable((m, m), symmetric=True)
    G1 = cp.Variable((m, m), symmetric=True)
    G2 = cp.Variable((m, m), symmetric=True)
    X = cp.Variable((m, n_y))
    F = cp.Variable((m, n_y))
    eta = cp.Variable(nonneg=True)
    eps1 = cp.Variable() if prob.epsilon1 is None else prob.epsilon1

    xi21 = (X @ C - P @ A) / sigma
    xi32 = F.T - X.T / sigma
    xi = cp.bmat(
        [
            [P @ A + A.T @ P - X @ C - C.T @ X.T, xi21.T, X],
            [xi21, -(2.0 / sigma) * P + G1 / (sigma * mu1) + G2 / (sigma * mu2), xi32.T],
            [X.T, xi32, -eps1 * np.eye(n_y)],
        ]
    )
    residual = P - F @ C
    relax = cp.bmat([[eta * np.eye(m), residual.T], [residual, eta * np.eye(m)]])
    constraints = [
        0.5 * (xi + xi.T) << -delta * np.eye(2 * m + n_y),
        0.5 * (relax + relax.T) >> 0,
        P >> (trace_p / (m * cond_max)) * np.eye(m),
        G1 >> delta * np.eye(m),
        G2 >> delta * np.eye(m),
        cp.trace(P) == trace_p,
    ]
    if prob.epsilon1 is None:
        constraints += [eps1 >= delta, eps1 <= epsilon1_max]
    problem = cp.Problem(cp.Minimize(eta + x_weight * cp.norm(X, "fro")), constraints)
    solver = _installed_solver()
    try:
        problem.solve(solver=solver)
    except cp.SolverError as exc:
        raise InfeasibleDesignError(f"{solver} failed: {exc}") from exc
    logger.debug("%s status %s, eta %s", solver, problem.status, eta.value)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise InfeasibleDesignError(f"semidefinite program is {problem.status}")
    epsilon1 = float(eps1.value) if prob.epsilon1 is None else prob.epsilon1
    return _finish(prob, P.value, G1.value, G2.value, X.value, F.value, epsilon1)


def solve_design(
    prob: DesignProblem,
    method: str = "sdp",
    seed: int = 0,
    starts: int = DEFAULT_STARTS,
    delta: float = DEFAULT_DELTA,
    trace_p: float = DEFAULT_TRACE_P,
    epsilon1_max: float = DEFAULT_EPSILON1_MAX,
    cond_max: float = DEFAULT_COND_MAX,
    x_weight: float = 1e-3,
    max_iter: int = 5000,
) -> DesignSolution:
    """Find a certified design and recover ``L = P^-1 X``.

    ``method="sdp"`` solves the semidefinite program with cvxpy, minimizing the relaxation
    level ``eta`` under ``trace(P) = trace_p``; ``method="subgradient"`` runs seeded
    projected-subgradient starts. The subgradient search also takes over when cvxpy is missing
    or its answer does not pass the strict certificate.
    """
    if method not in ("sdp", "subgradient"):
        raise ValidationError(f"unknown design method {method!r}")
    _require_solvable(prob)
    if method == "sdp":
        if cp is None:
            logger.warning("cvxpy is not installed; using the subgradient search")
        else:
            try:
                sol = _solve_sdp(prob, delta, trace_p, epsilon1_max, cond_max, x_weight)
            except InfeasibleDesignError as exc:
                logger.warning("%s; using the subgradient search", exc)
            else:
                report = check_solution(prob, sol, **STRICT_TOLERANCES)
                if report.passed:
                    logger.info("gains solved by SDP, lambda_max(Xi)=%.3e", report.lambda_max_xi)
                    return sol
                logger.warning("SDP answer failed the certificate: %s", "; ".join(report.failures))
    sol = _solve_subgradient(prob, seed, starts, delta, trace_p, max_iter)
    report = check_solution(prob, sol, **STRICT_TOLERANCES)
    if not report.passed:
        raise InfeasibleDesignError(
            "no certified design found",
            {"lambda_max_xi": report.lambda_max_xi, "lambda_min_p": report.lambda_min_p},
        )
    logger.info("gains solved by subgradient search, lambda_max(Xi)=%.3e", report.lambda_max_xi)
    return sol


def _bound_terms(sol: DesignSolution, bounds: BoundParams, prob: DesignProblem):
    xi = assemble_xi(prob, *sol.candidate)
    lam_neg = _lam_min(-xi)
    if lam_neg <= 0.0:
        raise ValidationError("solution is not certified: lambda_max(Xi) >= 0")
    gamma_inv = linalg.inv(bounds.Gamma)
    sigma, mu1, mu2 = prob.sigma, prob.mu1, prob.mu2
    alpha = lam_neg / max(_lam_max(sol.P), _lam_max(gamma_inv) / sigma)
    beta = (mu1 / sigma) * bounds.f1 * _lam_max(gamma_inv @ linalg.inv(sol.G1) @ gamma_inv)
    epsilon2 = (mu2 / sigma) * _lam_max(sol.F.T @ linalg.inv(sol.G2) @ sol.F)
    c_min = min(_lam_min(sol.P), _lam_min(gamma_inv) / sigma)
    return alpha, beta, epsilon2, c_min


def _problem_of(sol: DesignSolution, prob: DesignProblem | None) -> DesignProblem:
    prob = prob or sol.problem
    if prob is None:
        raise ValidationError("the design problem is required")
    return prob


def ultimate_bound(
    sol: DesignSolution, bounds: BoundParams, prob: DesignProblem | None = None
) -> tuple[float, float]:
    """Radius ``rho`` of the ball the errors ``(e_x, e_f)`` end in, and ``rho + sqrt(f2)``."""
    prob = _problem_of(sol, prob)
    alpha, beta, epsilon2, c_min = _bound_terms(sol, bounds, prob)
    rho = math.sqrt(1.0 / c_min) * (
        math.sqrt(beta / alpha)
        + math.sqrt(sol.epsilon1 / alpha) * bounds.yf_peak
        + math.sqrt(epsilon2 / alpha) * bounds.dyf_peak
    )
    return rho, rho + math.sqrt(bounds.f2)


def lyapunov_value(sol: DesignSolution, gamma, sigma: float, e_x, e_f) -> float:
    e_x, e_f = np.asarray(e_x, dtype=float), np.asarray(e_f, dtype=float)
    gamma_inv = linalg.inv(np.atleast_2d(np.asarray(gamma, dtype=float)))
    return float(e_x @ sol.P @ e_x + e_f @ gamma_inv @ e_f / sigma)


def error_envelope(
    sol: DesignSolution, bounds: BoundParams, v0: float, t, prob: DesignProblem | None = None
) -> np.ndarray:
    """``sqrt(exp(-alpha t) V0 / c_min) + rho``, the bound on the errors before they settle."""
    prob = _problem_of(sol, prob)
    alpha, _, _, c_min = _bound_terms(sol, bounds, prob)
    rho, _ = ultimate_bound(sol, bounds, prob)
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.exp(-alpha * t) * v0 / c_min) + rho


def _matrix_doc(matrix) -> dict:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return {"rows": matrix.shape[0], "cols": matrix.shape[1], "data": matrix.ravel().tolist()}


def _matrix_from(doc: dict) -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix entry: {exc}") from exc
    if len(data) != rows * cols:
        raise ValidationError(f"matrix data holds {len(data)} values, expected {rows * cols}")
    return np.array(data, dtype=float).reshape(rows, cols)


def solution_to_dict(sol: DesignSolution) -> dict:
    doc = {name: _matrix_doc(getattr(sol, name)) for name in ("P", "G1", "G2", "X", "F", "L")}
    doc.update(epsilon1=sol.epsilon1, eta=sol.eta)
    if sol.problem is not None:
        doc["problem"] = sol.problem.to_dict()
    return doc


def solution_from_dict(doc: dict) -> DesignSolution:
    problem = None
    if doc.get("problem"):
        problem_doc = doc["problem"]
        problem = DesignProblem(
            _matrix_from(problem_doc["A_s"]),
            _matrix_from(problem_doc["C_s"]),
            float(problem_doc.get("mu1", 1.0)),
            float(problem_doc.get("mu2", 1.0)),
            float(problem_doc.get("sigma", 1.0)),
            problem_doc.get("epsilon1"),
        )
    try:
        P, G1, G2, X, F = (_matrix_from(doc[name]) for name in ("P", "G1", "G2", "X", "F"))
    except KeyError as exc:
        raise ValidationError(f"gain document lacks {exc}") from exc
    L = _matrix_from(doc["L"]) if "L" in doc else linalg.solve(P, X)
    epsilon1 = doc.get("epsilon1")
    if epsilon1 is None:
        if problem is None:
            raise ValidationError("epsilon1 is missing and there is no problem to fit it on")
        epsilon1 = fit_epsilon1(problem, P, G1, G2, X, F)
        logger.info("fitted epsilon1 = %.4g for the loaded gains", epsilon1)
    eta = doc.get("eta")
    if eta is None:
        eta = float(np.linalg.norm(P - F @ problem.C_s, 2)) if problem is not None else 0.0
    return DesignSolution(P, G1, G2, X, F, epsilon1, L, eta, problem)


def dump_solution(sol: DesignSolution, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(solution_to_dict(sol), indent=2) + "\n", encoding="utf-8")
    return path


def load_solution(path) -> DesignSolution:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"gain file {path} does not exist")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"gain file {path} is not valid JSON: {exc}") from exc
    return solution_from_dict(doc)


def solution_summary(sol: DesignSolution) -> dict:
    """Plain scalars of a solution for reports."""
    return {
        "epsilon1": sol.epsilon1,
        "eta": sol.eta,
        "lambda_min_p": _lam_min(sol.P),
        **{f"L_{i}{j}": v for (i, j), v in np.ndenumerate(sol.L)},
    }

