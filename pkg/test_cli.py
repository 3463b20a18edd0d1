#!/usr/bin/env python3

import json

import pytest
from typer.testing import CliRunner

from chaincontrol.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, EXIT_UNREACHED, app
from chaincontrol.config import Config

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep CLI writes and Config overrides inside the test."""
    monkeypatch.setattr(Config, "OUTPUT_DIR", tmp_path / "results")
    for name in ("MAX_EVALUATIONS", "T_MAX", "CONCURRENCY"):
        monkeypatch.setattr(Config, name, getattr(Config, name))


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_check_controllable(tmp_path):
    out = tmp_path / "check.json"
    result = runner.invoke(app, ["check", "--spec", "heis4_r1", "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    report = _read(out)
    assert report["controllable"]
    assert report["closure_dimension"] == 15


def test_check_not_controllable(tmp_path):
    out = tmp_path / "check.json"
    result = runner.invoke(app, ["check", "--spec", "heis4_r2", "--out", str(out)])
    assert result.exit_code == EXIT_NEGATIVE
    assert not _read(out)["controllable"]


def test_check_malformed_spec(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("n = 4\ncouplings = 1, 1\nactuator = 1\n")
    result = runner.invoke(app, ["check", "--spec", str(bad)])
    assert result.exit_code == EXIT_ERROR


def test_prooftrace_exit_codes(tmp_path):
    out = tmp_path / "trace.json"
    result = runner.invoke(app, ["prooftrace", "--spec", "heis4_r1", "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    report = _read(out)
    assert report["kind"] == "prooftrace"
    assert report["passed"]

    assert runner.invoke(app, ["prooftrace", "--spec", "heis4_r2"]).exit_code == EXIT_NEGATIVE

    small = tmp_path / "three.spec"
    small.write_text("n = 3\ncouplings = 1, 2\nenergies = 0, 0.5, -0.3\nactuator = 1\n")
    assert runner.invoke(app, ["prooftrace", "--spec", str(small)]).exit_code == EXIT_NEGATIVE


def test_table1_validate(tmp_path):
    out = tmp_path / "validate.json"
    result = runner.invoke(app, ["table1", "validate", "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    report = _read(out)
    assert report["passed"]
    assert report["max_error"] == pytest.approx(6.02407e-05)


def test_table1_replay_is_informational(tmp_path):
    out = tmp_path / "replay.json"
    result = runner.invoke(app, ["table1", "replay", "--coupling", "0.7", "--f-on", "2", "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    assert len(_read(out)["rows"]) == 12
    assert runner.invoke(app, ["table1", "rebuild"]).exit_code == EXIT_ERROR


def test_synth_writes_result_and_sequence(tmp_path):
    out = tmp_path / "ii.json"
    result = runner.invoke(app, [
        "synth", "--spec", "heis4_r1", "--gate", "II", "--k", "2", "--restarts", "2",
        "--max-evaluations", "100", "--seed", "1", "--out", str(out), "--json",
    ])
    assert result.exit_code in (EXIT_OK, EXIT_UNREACHED), result.output
    report = _read(out)
    assert report["kind"] == "synthesis"
    assert report["k"] == 2
    assert len(report["durations"]) == 2
    assert out.with_suffix(".csv").exists()

    svg = tmp_path / "ii.svg"
    plotted = runner.invoke(app, ["plot", str(out), "--out", str(svg)])
    assert plotted.exit_code == EXIT_OK, plotted.output
    assert svg.stat().st_size > 0

    verified = runner.invoke(app, [
        "verify", "--spec", "heis4_r1", "--sequence", str(out.with_suffix(".csv")), "--gate", "II",
        "--out", str(tmp_path / "verify.json"),
    ])
    assert verified.exit_code in (EXIT_OK, EXIT_UNREACHED)
    assert _read(tmp_path / "verify.json")["error"] == pytest.approx(report["error"], abs=1e-12)


def test_synth_preconditions():
    result = runner.invoke(app, ["synth", "--spec", "heis4_r1", "--gate", "II", "--restarts", "0"])
    assert result.exit_code == EXIT_ERROR
    assert runner.invoke(app, ["synth", "--spec", "heis4_r1", "--gate", "SWAP"]).exit_code == EXIT_ERROR


def test_plot_prooftrace_and_empty_report(tmp_path):
    trace = tmp_path / "trace.json"
    runner.invoke(app, ["prooftrace", "--spec", "heis4_r1", "--out", str(trace)])
    assert runner.invoke(app, ["plot", str(trace)]).exit_code == EXIT_OK
    assert trace.with_suffix(".svg").stat().st_size > 0

    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert runner.invoke(app, ["plot", str(empty)]).exit_code == EXIT_ERROR


def test_placements_and_config():
    result = runner.invoke(app, ["placements", "--spec", "heis4_r1"])
    assert result.exit_code == EXIT_OK, result.output
    assert runner.invoke(app, ["config"]).exit_code == EXIT_OK


def test_scan_writes_every_row(tmp_path):
    out = tmp_path / "scan.csv"
    result = runner.invoke(app, ["scan", "--couplings", "1", "--f-on", "-1,1", "--out", str(out), "--json"])
    assert result.exit_code == EXIT_OK, result.output
    assert len(out.read_text().strip().splitlines()) == 1 + 2 * 6 * 2
    assert runner.invoke(app, ["scan", "--couplings", "one"]).exit_code != EXIT_OK
