# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import math

import numpy as np
import pytest

from stsource.errors import ValidationError
from stsource.pde_core import ConstantProfile, heat_rod
from stsource.scenarios import (
    PUBLISHED_RMSE,
    PUBLISHED_TABLE1,
    Scenario,
    Table1Row,
    design_scenario,
    published_scenario,
    reproduce_table1,
    run_scenario,
    simulate_scenario,
)
from stsource.simulator import place_sensors_uniform
from stsource.sources import abrupt_source, window_source


def _short_window(out=None, **kwargs):
    return Scenario(heat_rod(), window_source(), horizon=12.0, out=out, **kwargs)


@pytest.mark.slow
def test_abrupt_scenario_matches_the_published_rmse(abrupt_outcome):
    report = abrupt_outcome.report
    assert report.rmse == pytest.approx(PUBLISHED_RMSE["abrupt"], rel=0.15)
    assert report.ideal_rmse is None
    assert set(report.settle) == {"t10", "t40"}
    assert abrupt_outcome.f_hat.values.shape == (8001, 201)
    np.testing.assert_allclose(abrupt_outcome.solution.L, [[-0.6231, -0.6231], [-2.6069, 2.6069]])


@pytest.mark.slow
def test_abrupt_estimate_settles_near_the_true_coefficients(abrupt_outcome):
    traj = abrupt_outcome.trajectory
    np.testing.assert_allclose(traj.f_hat_s[-1], [2.0, 3.0], atol=0.1)


@pytest.mark.slow
def test_incipient_scenario_matches_the_published_rmse():
    report = run_scenario(published_scenario("incipient"), write=False).report
    assert report.rmse == pytest.approx(PUBLISHED_RMSE["incipient"], rel=0.15)


@pytest.mark.slow
def test_zero_source_leaves_only_a_small_residue():
    outcome = run_scenario(published_scenario("zero"), write=False)
    assert outcome.report.rmse <= 0.05
    assert outcome.report.settle == {}


def test_zero_scenario_starts_cold():
    assert published_scenario("zero").system.x0 == ConstantProfile(0.0)
    with pytest.raises(ValidationError, match="unknown scenario"):
        published_scenario("storm")


def test_scenario_invariants():
    rod = heat_rod()
    with pytest.raises(ValidationError, match="at least as many sensors"):
        Scenario(rod, abrupt_source(), m=3)
    with pytest.raises(ValidationError, match="m must be positive"):
        Scenario(rod, abrupt_source(), m=0)
    with pytest.raises(ValidationError, match="not before the horizon"):
        Scenario(rod, abrupt_source(), horizon=40.0)
    with pytest.raises(ValidationError, match="pin file"):
        Scenario(rod, abrupt_source(), gains="pin")
    with pytest.raises(ValidationError, match="Gamma must be 2x2"):
        Scenario(rod, abrupt_source(), gamma=np.eye(3))
    np.testing.assert_array_equal(Scenario(rod, abrupt_source()).gamma, 100.0 * np.eye(2))


def test_published_gains_do_not_fit_three_modes():
    sensors = place_sensors_uniform(3, (0.0, np.pi))
    sc = Scenario(heat_rod(sensor_positions=sensors.positions), window_source(), m=3)
    with pytest.raises(ValidationError, match="pinned gains"):
        design_scenario(sc)


def test_missing_pin_file_is_reported(tmp_path):
    sc = published_scenario("abrupt", pin_file=tmp_path / "none.json")
    with pytest.raises(ValidationError, match="does not exist"):
        design_scenario(sc)


def test_design_scenario_certifies_and_writes_the_gains(tmp_path):
    sol, report = design_scenario(published_scenario("abrupt", out=tmp_path))
    assert report.passed, report.failures
    assert (tmp_path / "gains.json").is_file()
    assert sol.L.shape == (2, 2)


def test_solved_design_passes_the_strict_certificate():
    _, report = design_scenario(_short_window(gains="solve", method="subgradient"))
    assert report.passed, report.failures
    assert report.tolerances["tol_neg"] == 1e-8


def test_simulate_scenario_writes_outputs_and_field(tmp_path):
    sim, paths = simulate_scenario(_short_window(out=tmp_path))
    assert [p.name for p in paths] == ["y.csv", "x_field.csv"]
    assert sim.y.shape == (1201, 2)
    assert len(paths[0].read_text(encoding="utf-8").splitlines()) == 1202


def test_short_run_writes_identical_artifacts(tmp_path):
    first = run_scenario(_short_window(out=tmp_path / "a"))
    second = run_scenario(_short_window(out=tmp_path / "b"))
    names = sorted(p.name for p in first.paths)
    assert names == sorted(p.name for p in second.paths)
    assert {"report.csv", "ef_field.csv", "ideal_ef_field.csv", "gains.json"} <= set(names)
    for path in first.paths:
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes(), path.name
    report = (tmp_path / "a" / "report.csv").read_text(encoding="utf-8")
    assert report.startswith("metric,value\nrmse,")
    assert "ideal_rmse" in report and "f2_peak" in report


def test_short_run_stays_above_the_ideal_rmse():
    report = run_scenario(_short_window(), write=False).report
    assert report.ideal_rmse > 0.0
    assert report.rmse >= report.ideal_rmse - 0.05


def test_table1_skips_rows_that_cannot_run(tmp_path, caplog):
    rows = reproduce_table1(tmp_path, rows=[(3, 2)], workers=1)
    assert rows == []
    assert "skipped" in caplog.text
    assert (tmp_path / "table1.csv").read_text(encoding="utf-8").count("\n") == 1


def test_table1_row_carries_the_published_values():
    row = Table1Row(2, 3, 100.0, 0.75, 0.74)
    assert row.published == PUBLISHED_TABLE1[(2, 3)]
    assert row.values()[:5] == [2, 3, 100.0, 0.75, 0.74]
    assert all(math.isnan(v) for v in Table1Row(5, 5, 100.0, 0.5, 0.4).published)


@pytest.mark.slow
def test_table1_reproduction(tmp_path):
    rows = reproduce_table1(tmp_path, workers=1)
    assert [(r.m, r.n_y) for r in rows] == list(PUBLISHED_TABLE1)
    by_key = {(r.m, r.n_y): r for r in rows}
    assert by_key[(2, 4)].rmse > by_key[(3, 4)].rmse > by_key[(4, 4)].rmse
    for row in rows:
        assert row.rmse >= row.ideal_rmse - 0.05
        if row.m in (2, 3):
            assert row.ideal_rmse == pytest.approx(row.published[1], rel=0.10)
    lines = (tmp_path / "table1.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 7
    assert (tmp_path / "m4_ny4" / "report.csv").is_file()
