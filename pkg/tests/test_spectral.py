# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from stsource.errors import SpectrumError, ValidationError
from stsource.pde_core import (
    BoundaryConditions,
    PdeSystem,
    PointSensor,
    QuadratureRule,
    SineMode,
    heat_rod,
)
from stsource.spectral import (
    EigenPair,
    dirichlet_eigenpairs,
    numeric_eigenpairs,
    project_onto_modes,
    spectral_gap,
    system_eigenpairs,
)

ROD = (0.0, np.pi)


def test_analytic_eigenvalues_of_the_rod():
    pairs = dirichlet_eigenpairs(2.0, 4)
    assert [p.lam for p in pairs] == [-3.0, -6.0, -11.0, -18.0]
    assert [p.index for p in pairs] == [1, 2, 3, 4]


def test_numeric_eigenpairs_match_the_closed_form(rod):
    numeric = numeric_eigenpairs(rod, 4)
    analytic = dirichlet_eigenpairs(2.0, 4)
    z = np.linspace(0.0, np.pi, 401)
    for got, want in zip(numeric, analytic):
        assert got.lam == pytest.approx(want.lam, abs=1e-3)
        np.testing.assert_allclose(got.phi(z), want.phi(z), atol=1e-6)


def test_numeric_eigenfunctions_are_orthonormal(rod):
    rule = QuadratureRule.from_domain(ROD, 401)
    phis = [pair.phi for pair in numeric_eigenpairs(rod, 4)]
    gram = np.array([[rule.integrate(a(rule.nodes) * b(rule.nodes)) for b in phis] for a in phis])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)


def test_numeric_eigenvalues_with_neumann_ends():
    rod = PdeSystem(
        a1=0.0,
        a2=1.0,
        a3=-2.0,
        k_u=2.0,
        k_y=1.0,
        b_u=(SineMode(1, ROD),),
        c=(PointSensor(1.0),),
        domain=ROD,
        bc=BoundaryConditions(0.0, 1.0, 0.0, 0.0, 1.0, 0.0),
    )
    lams = [pair.lam for pair in numeric_eigenpairs(rod, 3)]
    assert lams == pytest.approx([-2.0, -3.0, -6.0], abs=1e-3)


def test_numeric_eigenpairs_need_homogeneous_conditions():
    rod = heat_rod()
    hot = PdeSystem(
        rod.a1, rod.a2, rod.a3, rod.k_u, rod.k_y, rod.b_u, rod.c, rod.domain,
        BoundaryConditions.dirichlet(left=1.0),
    )
    with pytest.raises(ValidationError, match="inhomogeneous"):
        numeric_eigenpairs(hot, 2)
    with pytest.raises(ValidationError, match="resolution"):
        numeric_eigenpairs(rod, 200, n_nodes=101)


def test_system_eigenpairs_picks_the_closed_form_for_the_rod(rod):
    pairs = system_eigenpairs(rod, 3)
    assert isinstance(pairs[0].phi, SineMode)
    with pytest.raises(ValidationError):
        system_eigenpairs(rod, 3, method="lanczos")


def test_analytic_eigenpairs_refuse_other_systems():
    hot = heat_rod(beta_u=3.0)
    with pytest.raises(ValidationError, match="analytic"):
        dirichlet_eigenpairs(2.0, 3, system=hot)


def test_spectral_gap_of_the_rod():
    partition = spectral_gap(dirichlet_eigenpairs(2.0, 6), 2)
    assert partition.epsilon == pytest.approx(3.0 / 11.0)
    assert partition.k == 4
    assert partition.slow_eigenvalues.tolist() == [-3.0, -6.0]
    assert partition.fast_eigenvalues.tolist() == [-11.0, -18.0, -27.0, -38.0]


def test_spectral_gap_truncates_a_short_fast_head():
    partition = spectral_gap(dirichlet_eigenpairs(2.0, 3), 2)
    assert partition.k == 1


def _pairs(*lams):
    return [EigenPair(lam, SineMode(j + 1, ROD), j + 1) for j, lam in enumerate(lams)]


def test_spectral_gap_rejects_an_unstable_fast_part():
    with pytest.raises(SpectrumError, match="unstable"):
        spectral_gap(_pairs(1.0, 0.5, 0.0), 2)


def test_spectral_gap_rejects_a_missing_gap():
    with pytest.raises(SpectrumError, match="no spectral gap"):
        spectral_gap(_pairs(-5.0, -3.0), 1)


def test_spectral_gap_needs_enough_pairs():
    with pytest.raises(ValidationError):
        spectral_gap(_pairs(-3.0, -6.0), 2)


def test_projection_onto_modes(rule):
    def profile(z):
        return 0.3 * SineMode(1, ROD)(z) - 0.7 * SineMode(3, ROD)(z)

    coeffs = project_onto_modes(profile, dirichlet_eigenpairs(2.0, 3), rule)
    np.testing.assert_allclose(coeffs, [0.3, 0.0, -0.7], atol=1e-10)


def test_projection_is_linear(rule):
    rng = np.random.default_rng(11)
    f, g = rng.standard_normal((2, rule.nodes.size))
    basis = dirichlet_eigenpairs(2.0, 4)
    combined = project_onto_modes(2.5 * f - 0.75 * g, basis, rule)
    separate = 2.5 * project_onto_modes(f, basis, rule) - 0.75 * project_onto_modes(g, basis, rule)
    np.testing.assert_allclose(combined, separate, rtol=0.0, atol=1e-12)
