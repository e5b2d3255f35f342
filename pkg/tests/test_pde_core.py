# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from stsource.errors import ValidationError
from stsource.pde_core import (
    BoundaryConditions,
    ConstantProfile,
    GridFunction,
    PdeSystem,
    PointSensor,
    QuadratureRule,
    SineMode,
    SpatioTemporalField,
    inner_product,
    l2_norm_profile,
    sample_profile,
    validate_system,
    window_profile,
)

ROD = (0.0, np.pi)


def test_sine_modes_are_orthonormal(rule):
    modes = [SineMode(j, ROD) for j in range(1, 9)]
    gram = np.array([[inner_product(a, b, rule) for b in modes] for a in modes])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-6)


def test_parseval_for_profiles_in_span(rule):
    def profile(z):
        return 0.3 * SineMode(1, ROD)(z) - 0.7 * SineMode(3, ROD)(z)

    assert l2_norm_profile(profile, rule) ** 2 == pytest.approx(0.58, abs=1e-8)


def test_point_sensor_evaluates_the_other_argument(rule):
    value = inner_product(PointSensor(np.pi / 4), SineMode(1, ROD), rule)
    assert value == pytest.approx(np.sqrt(1.0 / np.pi), abs=1e-12)
    assert inner_product(SineMode(2, ROD), PointSensor(3 * np.pi / 4), rule) == pytest.approx(
        -np.sqrt(2.0 / np.pi), abs=1e-12
    )


def test_point_sensor_on_grid_function_interpolates(rule):
    grid = GridFunction(rule.nodes, 2.0 * rule.nodes)
    assert inner_product(PointSensor(1.0), grid, rule) == pytest.approx(2.0)


def test_two_point_sensors_have_no_inner_product(rule):
    with pytest.raises(ValidationError):
        inner_product(PointSensor(1.0), PointSensor(2.0), rule)


def test_window_takes_half_on_interior_edges():
    window = window_profile(0.0, np.pi / 4, ROD, scale=2.0)
    values = window(np.array([0.0, 0.5, np.pi / 4, 1.0]))
    assert values.tolist() == [2.0, 2.0, 1.0, 0.0]
    assert window.length == pytest.approx(np.pi / 4)


def test_window_integrates_to_its_length(rule):
    window = window_profile(0.0, np.pi / 4, ROD)
    assert rule.integrate(sample_profile(window, rule)) == pytest.approx(np.pi / 4, abs=1e-12)


def test_window_norm_is_the_root_of_its_length(rule):
    window = window_profile(0.0, np.pi / 4, ROD)
    assert l2_norm_profile(window, rule) == pytest.approx(np.sqrt(np.pi / 4), abs=1e-12)
    other = window_profile(np.pi / 8, np.pi / 2, ROD)
    assert inner_product(window, other, rule) == pytest.approx(np.pi / 8, abs=1e-12)
    assert inner_product(window, SineMode(2, ROD), rule) == pytest.approx(
        np.sqrt(2.0 / np.pi) / 2.0, abs=1e-6
    )


def test_window_validation():
    with pytest.raises(ValidationError, match="empty window"):
        window_profile(1.0, 1.0, ROD)
    with pytest.raises(ValidationError, match="outside"):
        window_profile(4.0, 5.0, ROD)


def test_quadrature_rule_needs_an_odd_node_count():
    with pytest.raises(ValidationError, match="odd"):
        QuadratureRule.from_domain(ROD, 200)
    with pytest.raises(ValidationError, match="increasing"):
        QuadratureRule(np.array([0.0, 2.0, 1.0]))


def test_sample_profile_rejects_other_domains(rule):
    with pytest.raises(ValidationError, match="mismatched domains"):
        sample_profile(SineMode(1, (0.0, 1.0)), rule)
    with pytest.raises(ValidationError, match="mismatched domains"):
        sample_profile(np.zeros(11), rule)


def test_constant_profile_broadcasts(rule):
    assert sample_profile(ConstantProfile(1.5), rule).shape == (201,)


def test_heat_rod_coefficients(rod):
    assert (rod.a1, rod.a2, rod.a3, rod.k_u, rod.k_y) == (0.0, 1.0, -2.0, 2.0, 1.0)
    assert rod.n_u == 1 and rod.n_y == 2
    assert rod.length == pytest.approx(np.pi)
    assert rod.bc.left_is_dirichlet and rod.bc.right_is_dirichlet and rod.bc.homogeneous
    assert [c.position for c in rod.c] == pytest.approx([np.pi / 4, 3 * np.pi / 4])


def _system(**changes):
    fields = dict(
        a1=0.0,
        a2=1.0,
        a3=-2.0,
        k_u=2.0,
        k_y=1.0,
        b_u=(SineMode(1, ROD),),
        c=(PointSensor(1.0),),
        domain=ROD,
        bc=BoundaryConditions.dirichlet(),
    )
    fields.update(changes)
    return PdeSystem(**fields)


@pytest.mark.parametrize(
    ("changes", "message"),
    [
        ({"a2": 0.0}, "not parabolic"),
        ({"bc": BoundaryConditions(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)}, "degenerate left BC"),
        ({"bc": BoundaryConditions(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)}, "degenerate right BC"),
        ({"b_u": ()}, "empty actuator"),
        ({"c": ()}, "empty sensor"),
        ({"c": (PointSensor(4.0),)}, "outside the domain"),
        ({"domain": (1.0, 1.0)}, "empty domain"),
    ],
)
def test_validate_system_names_the_violation(changes, message):
    with pytest.raises(ValidationError, match=message):
        validate_system(_system(**changes))


def test_field_subtraction_needs_matching_grids():
    z = np.linspace(0.0, 1.0, 3)
    a = SpatioTemporalField(z, [0.0, 1.0], np.ones((2, 3)))
    b = SpatioTemporalField(z, [0.0, 2.0], np.ones((2, 3)))
    assert np.all((a - a).values == 0.0)
    with pytest.raises(ValidationError):
        a - b
    with pytest.raises(ValidationError):
        SpatioTemporalField(z, [0.0], np.ones((2, 3)))
