"""CLI surface: artifacts, exit codes, replay round trip."""

import json
import os

import pytest

from impactneedle.cli import main


@pytest.fixture()
def out(tmp_path):
    return str(tmp_path)


def test_optimize_writes_curve_and_reports_optimum(out, capsys):
    rc = main(["optimize", "--l-tube", "0.01905", "--out-dir", out])
    assert rc == 0
    text = capsys.readouterr().out
    assert "0.0127" in text
    path = os.path.join(out, "objective_curve.csv")
    with open(path) as f:
        header = f.readline()
        assert header.startswith("# ")
        first = f.readline().split(",")
    assert len(first) == 2
    float(first[0]), float(first[1])


def test_optimize_json_format(out):
    rc = main(["optimize", "--l-tube", "0.01905", "--out-dir", out,
               "--format", "json", "--grid", "100"])
    assert rc == 0
    rows = json.load(open(os.path.join(out, "objective_curve.json")))
    assert len(rows) == 100
    assert set(rows[0]) == {"magnet_length_m", "objective"}


def test_optimize_rejects_bad_tube(out, capsys):
    assert main(["optimize", "--l-tube", "-1", "--out-dir", out]) == 2
    assert "l-tube" in capsys.readouterr().err


def test_run_unknown_scenario(out, capsys):
    assert main(["run", "nope", "--out-dir", out]) == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_run_dc_pull_prints_force(out, capsys):
    assert main(["run", "dc_pull", "--out-dir", out]) == 0
    assert "17.07 mN" in capsys.readouterr().out
    assert main(["run", "dc_pull", "--position", "far_end",
                 "--out-dir", out]) == 0
    assert "11.38 mN" in capsys.readouterr().out


def test_run_and_replay_round_trip(out, capsys):
    rc = main(["run", "center_hammer", "--out-dir", out])
    assert rc == 0
    log_path = os.path.join(out, "center_hammer_log.json")
    assert os.path.exists(log_path)
    rc = main(["replay", log_path, "--out-dir", out])
    assert rc == 0
    assert "hash matches" in capsys.readouterr().out


def test_replay_detects_tampering(out, capsys):
    main(["run", "center_hammer", "--out-dir", out])
    capsys.readouterr()
    log_path = os.path.join(out, "center_hammer_log.json")
    log = json.load(open(log_path))
    log["trajectory_hash"] = "0" * 64
    json.dump(log, open(log_path, "w"))
    assert main(["replay", log_path, "--out-dir", out]) == 1
    assert "mismatch" in capsys.readouterr().err


def test_replay_unreadable_log(out, capsys):
    bad = os.path.join(out, "nolog.json")
    assert main(["replay", bad, "--out-dir", out]) == 2
    open(bad, "w").write("{not json")
    assert main(["replay", bad, "--out-dir", out]) == 2
