# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""CSV artifacts in a gnuplot-friendly layout.

Every float goes through :func:`fmt`, so repeated runs write identical bytes:

>>> fmt(0.1), fmt(float("nan"))
('1.0000000000e-01', 'nan')
"""

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .observer import ObserverTrajectory
from .pde_core import SpatioTemporalField
from .simulator import SimulationResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".10e"


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return format(value, FLOAT_FORMAT)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    logger.debug("wrote %s", path)
    return path


def _series_rows(t_grid, *columns):
    table = np.column_stack([np.asarray(t_grid, dtype=float)] + [np.asarray(c) for c in columns])
    return table.tolist()


def write_field(path, field: SpatioTemporalField) -> Path:
    """One row per time stamp; the header row holds the spatial nodes after a ``t`` column."""
    header = ["t"] + [fmt(z) for z in field.z_grid]
    return write_rows(path, header, _series_rows(field.t_grid, field.values))


def write_simulation(out_dir, sim: SimulationResult) -> list[Path]:
    out_dir = Path(out_dir)
    header = ["t"] + [f"y{i + 1}" for i in range(sim.y.shape[1])]
    return [
        write_rows(out_dir / "y.csv", header, _series_rows(sim.t_grid, sim.y)),
        write_field(out_dir / "x_field.csv", sim.x),
    ]


def write_trajectory(out_dir, traj: ObserverTrajectory, f_s=None) -> list[Path]:
    """``yhat.csv``, ``fs_vs_fshat.csv`` and the full observer record ``trajectory.csv``.

    ``f_s`` holds the true slow-mode source coefficients sampled on the trajectory grid.
    """
    out_dir = Path(out_dir)
    m, n_y = traj.f_hat_s.shape[1], traj.y_hat.shape[1]
    f_s = np.zeros_like(traj.f_hat_s) if f_s is None else np.asarray(f_s, dtype=float)
    paths = [
        write_rows(
            out_dir / "yhat.csv",
            ["t"] + [f"yhat{i + 1}" for i in range(n_y)],
            _series_rows(traj.t_grid, traj.y_hat),
        )
    ]
    header = ["t"]
    for j in range(m):
        header += [f"fs{j + 1}", f"fshat{j + 1}"]
    interleaved = np.empty((f_s.shape[0], 2 * m))
    interleaved[:, 0::2], interleaved[:, 1::2] = f_s, traj.f_hat_s
    rows = _series_rows(traj.t_grid, interleaved)
    paths.append(write_rows(out_dir / "fs_vs_fshat.csv", header, rows))
    header = (
        ["t"]
        + [f"xhat{j + 1}" for j in range(m)]
        + [f"ey{i + 1}" for i in range(n_y)]
        + [f"fshat{j + 1}" for j in range(m)]
    )
    paths.append(
        write_rows(
            out_dir / "trajectory.csv",
            header,
            _series_rows(traj.t_grid, traj.x_hat, traj.e_y, traj.f_hat_s),
        )
    )
    return paths


def write_report(path, rows: Iterable[tuple[str, object]]) -> Path:
    return write_rows(path, ["metric", "value"], rows)
