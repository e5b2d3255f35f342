# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from stsource.errors import DivergenceError, ValidationError
from stsource.observer import (
    GainSet,
    ObserverState,
    ObserverTrajectory,
    observer_step,
    run_identification,
    source_estimate_pi,
    stable_substeps,
    synthesize_source,
)
from stsource.pde_core import SineMode
from stsource.reduction import simulate_slow_model
from stsource.scenarios import published_scenario, run_scenario

ROD = (0.0, np.pi)


def test_gain_set_validation():
    eye = np.eye(2)
    with pytest.raises(ValidationError, match="same shape"):
        GainSet(eye, np.ones((2, 3)), eye, 1.0)
    with pytest.raises(ValidationError, match="symmetric"):
        GainSet(eye, eye, [[1.0, 0.5], [0.0, 1.0]], 1.0)
    with pytest.raises(ValidationError, match="positive definite"):
        GainSet(eye, eye, -eye, 1.0)
    with pytest.raises(ValidationError, match="sigma"):
        GainSet(eye, eye, eye, 0.0)


def test_source_estimate_is_proportional_plus_integral():
    gains = GainSet(np.eye(2), [[1.0, 0.0], [0.0, 2.0]], 10.0 * np.eye(2), 0.5)
    estimate = source_estimate_pi([1.0, 1.0], [2.0, 0.0], gains)
    np.testing.assert_allclose(estimate, [-20.0, -20.0])
    with pytest.raises(ValidationError):
        source_estimate_pi([1.0], [0.0, 0.0], gains)


def test_observer_recovers_a_constant_source_without_truncation(slow_model, published_gains):
    dt, n = 0.01, 4001
    f_s = np.array([1.0, -0.5])
    u = np.ones((n, 1))
    _, y = simulate_slow_model(slow_model, u, np.tile(f_s, (n, 1)), dt, [1.0, 0.0])
    gains = published_gains.gains(100.0 * np.eye(2), 1.0)
    traj = run_identification(y, u, slow_model, gains, dt)
    assert np.linalg.norm(traj.f_hat_s[-1] - f_s) < 1e-3
    assert np.linalg.norm(traj.e_y[-1]) < 1e-3
    assert traj.t_grid[-1] == pytest.approx(40.0)


def test_observer_step_flags_divergence(slow_model):
    gains = GainSet(1e9 * np.eye(2), np.eye(2), np.eye(2), 1.0)
    state = ObserverState.initial(2, 2)
    with pytest.raises(DivergenceError) as excinfo:
        observer_step(state, [1.0, 1.0], [0.0], slow_model, gains, 1.0, step=7)
    assert excinfo.value.step == 7


def test_observer_step_holds_the_error_integral(slow_model):
    gains = GainSet(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), 1.0)
    state = ObserverState.initial(2, 2)
    nxt = observer_step(state, [1.0, 0.0], [0.0], slow_model, gains, 0.1)
    np.testing.assert_allclose(nxt.ey_integral, [-0.1, 0.0])
    assert nxt.t == pytest.approx(0.1)


def test_fast_loops_are_split_into_substeps(slow_model, published_gains):
    slow = published_gains.gains(100.0 * np.eye(2), 1.0)
    fast = GainSet(1e4 * np.eye(2), np.zeros((2, 2)), np.eye(2), 1.0)
    assert stable_substeps(slow_model, slow, 0.01) == 1
    assert stable_substeps(slow_model, fast, 0.01) > 10


def test_synthesis_from_modal_coefficients():
    t = np.array([0.0, 1.0])
    z = np.linspace(0.0, np.pi, 5)
    zeros = np.zeros((2, 2))
    traj = ObserverTrajectory(t, zeros, zeros, zeros, np.array([[0.0, 0.0], [1.0, 2.0]]))
    field = synthesize_source(traj, [SineMode(1, ROD), SineMode(2, ROD)], z)
    np.testing.assert_allclose(field.values[0], 0.0)
    np.testing.assert_allclose(field.values[1], SineMode(1, ROD)(z) + 2.0 * SineMode(2, ROD)(z))
    with pytest.raises(ValidationError):
        synthesize_source(traj, [SineMode(1, ROD)], z)


def test_trajectory_series_share_the_grid():
    with pytest.raises(ValidationError):
        ObserverTrajectory(np.zeros(3), np.zeros((2, 2)), np.zeros((3, 2)), np.zeros((3, 2)),
                           np.zeros((3, 2)))


def test_exact_start_without_correction_tracks_the_slow_model(slow_model):
    dt, n = 0.01, 501
    u = np.ones((n, 1))
    x_s, y_s = simulate_slow_model(slow_model, u, np.zeros((n, 2)), dt, [1.0, 0.0])
    gains = GainSet(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), 1.0)
    traj = run_identification(y_s, u, slow_model, gains, dt, x_hat0=[1.0, 0.0])
    np.testing.assert_allclose(traj.x_hat, x_s, atol=1e-8)
    np.testing.assert_allclose(traj.e_y, 0.0, atol=1e-8)
    np.testing.assert_array_equal(traj.f_hat_s, 0.0)


@pytest.mark.slow
def test_halving_dt_barely_moves_the_source_estimate(abrupt_outcome):
    fine = run_scenario(published_scenario("abrupt", dt=0.005), write=False)
    coarse_f = abrupt_outcome.trajectory.f_hat_s
    fine_f = fine.trajectory.f_hat_s
    assert fine_f.shape[0] == 2 * coarse_f.shape[0] - 1
    assert np.max(np.abs(fine_f[::2] - coarse_f)) < 1e-3
