# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
from pathlib import Path

import pytest

from stsource.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, build_parser, main
from stsource.scenarios import PUBLISHED_GAINS

HEATROD = str(Path(__file__).parents[1] / "scenarios" / "heatrod.toml")


@pytest.fixture
def short_window(tmp_path):
    path = tmp_path / "window.toml"
    path.write_text(
        '[source]\nkind = "separable-window"\nwindow = [0.0, "pi/4"]\nonset = 10.0\n\n'
        "[run]\nhorizon = 12.0\n",
        encoding="utf-8",
    )
    return str(path)


@pytest.mark.parametrize(
    "argv", [[], ["storm"], ["-q", "-v", "design", HEATROD], ["reproduce", "figs"]]
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_VALIDATION


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "simulate" in capsys.readouterr().out


def test_parser_defaults():
    args = build_parser().parse_args(["reproduce", "table1"])
    assert (args.target, args.out, args.workers, args.seed) == ("table1", None, None, None)


def test_design_prints_the_certificate(tmp_path, capsys):
    assert main(["design", HEATROD, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "eta" in out
    assert (tmp_path / "gains.json").is_file()


def test_rounded_gains_fail_the_strict_certificate(tmp_path, capsys):
    argv = ["design", HEATROD, "--out", str(tmp_path), "--pin-gains", str(PUBLISHED_GAINS)]
    assert main(argv) == EXIT_NUMERICAL
    assert "FAIL" in capsys.readouterr().out


def test_missing_pin_file(tmp_path, caplog):
    argv = ["design", HEATROD, "--out", str(tmp_path), "--pin-gains", str(tmp_path / "x.json")]
    assert main(argv) == EXIT_VALIDATION
    assert "does not exist" in caplog.text


def test_missing_config(tmp_path):
    assert main(["simulate", str(tmp_path / "none.toml")]) == EXIT_VALIDATION


def test_onset_after_the_horizon_is_rejected(tmp_path, caplog):
    path = tmp_path / "short.toml"
    path.write_text("[run]\nhorizon = 1.0\n", encoding="utf-8")
    assert main(["simulate", str(path), "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "horizon" in caplog.text


def test_simulate_writes_the_outputs(tmp_path, short_window, capsys):
    out = tmp_path / "sim"
    assert main(["-q", "simulate", short_window, "--out", str(out), "--dt", "0.02"]) == EXIT_OK
    assert "Wrote:" in capsys.readouterr().out
    assert len((out / "y.csv").read_text(encoding="utf-8").splitlines()) == 602


def test_identify_reports_the_rmse(tmp_path, short_window, capsys):
    out = tmp_path / "run"
    assert main(["identify", short_window, "--out", str(out), "--nodes", "101"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "rmse" in printed and "ideal_rmse" in printed
    assert (out / "report.csv").is_file()
