# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from stsource.artifacts import fmt, write_field, write_report, write_rows, write_trajectory
from stsource.observer import ObserverTrajectory
from stsource.pde_core import SpatioTemporalField


@pytest.mark.parametrize(
    "value, text",
    [
        (0.5, "5.0000000000e-01"),
        (np.float64(-2.0), "-2.0000000000e+00"),
        (3, "3"),
        (np.int64(7), "7"),
        ("PASS", "PASS"),
        (float("inf"), "inf"),
        (-float("inf"), "-inf"),
        (float("nan"), "nan"),
    ],
)
def test_fmt(value, text):
    assert fmt(value) == text


def test_field_header_holds_the_nodes(tmp_path):
    field = SpatioTemporalField([0.0, 1.0], [0.0, 0.5], [[1.0, 2.0], [3.0, 4.0]])
    lines = write_field(tmp_path / "f.csv", field).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,0.0000000000e+00,1.0000000000e+00"
    assert lines[2] == "5.0000000000e-01,3.0000000000e+00,4.0000000000e+00"
    assert len(lines) == 3


def test_rows_create_parent_directories(tmp_path):
    path = write_report(tmp_path / "a" / "b" / "report.csv", [("rmse", 0.25), ("rows", 4)])
    assert path.read_text(encoding="utf-8") == "metric,value\nrmse,2.5000000000e-01\nrows,4\n"


def test_trajectory_files_interleave_true_and_estimated_coefficients(tmp_path):
    t = np.array([0.0, 0.01])
    traj = ObserverTrajectory(
        t,
        np.array([[1.0, 2.0], [3.0, 4.0]]),
        np.zeros((2, 3)),
        np.ones((2, 3)),
        np.array([[5.0, 6.0], [7.0, 8.0]]),
    )
    paths = write_trajectory(tmp_path, traj, np.array([[0.5, 0.6], [0.7, 0.8]]))
    assert [p.name for p in paths] == ["yhat.csv", "fs_vs_fshat.csv", "trajectory.csv"]
    fs_lines = paths[1].read_text(encoding="utf-8").splitlines()
    assert fs_lines[0] == "t,fs1,fshat1,fs2,fshat2"
    assert [float(v) for v in fs_lines[2].split(",")] == [0.01, 0.7, 7.0, 0.8, 8.0]
    header = paths[2].read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,xhat1,xhat2,ey1,ey2,ey3,fshat1,fshat2"


def test_identical_rows_write_identical_bytes(tmp_path):
    rows = np.random.default_rng(1).standard_normal((20, 4)).tolist()
    first = write_rows(tmp_path / "first.csv", ["a", "b", "c", "d"], rows)
    second = write_rows(tmp_path / "second.csv", ["a", "b", "c", "d"], rows)
    assert first.read_bytes() == second.read_bytes()
