"""Session command log, frames, and bit-exact replay."""

import json
import math

import pytest

from impactneedle.config import build_default
from impactneedle.session import CommandError, Session, replay

CFG = build_default()


def _teleop():
    return Session("teleop", seed=0, cfg=CFG, sample_every=50)


def test_commands_are_recorded_with_steps():
    s = _teleop()
    s.apply("set_pull", {"pull": 0.5})
    s.step(120)
    s.apply("hammer_on")
    s.step(10)
    s.apply("hammer_off")
    kinds = [(c["kind"], c["step"]) for c in s.log]
    assert kinds == [("set_pull", 0), ("hammer_on", 120), ("hammer_off", 130)]
    assert [c["seq"] for c in s.log] == [0, 1, 2]


def test_replay_reproduces_the_hash():
    s = _teleop()
    s.apply("set_direction", {"direction": [0.0, 1.0]})
    s.apply("set_pull", {"pull": 0.8})
    s.step(500)
    s.apply("hammer_on")
    s.apply("set_Kb", {"value": 0.4})
    s.step(1500)
    s.apply("hammer_off")
    s.apply("pulse_torque", {"sign": -1, "pull": 0.4, "duration": 0.1})
    s.step(1000)
    log = json.loads(json.dumps(s.log_dict()))   # round-trip like the CLI does
    r = replay(log, cfg=CFG)
    assert r.trajectory_hash() == s.trajectory_hash()
    assert r.sim.state.position == s.sim.state.position
    assert r.sim.state.currents == s.sim.state.currents


def test_replay_of_empty_log():
    s = _teleop()
    s.step(300)
    r = replay(s.log_dict(), cfg=CFG)
    assert r.trajectory_hash() == s.trajectory_hash()


def test_scripted_run_replays_without_controller():
    s = Session("bacon_penetration", seed=0, cfg=CFG, scripted=True,
                sample_every=100)
    s.step(350000)   # enough to reach the face and switch to hammering
    assert any(c["kind"] == "hammer_on" for c in s.log)
    r = replay(s.log_dict(), cfg=CFG)
    assert r.controller is None
    assert r.trajectory_hash() == s.trajectory_hash()


def test_direction_must_be_unit():
    s = _teleop()
    with pytest.raises(CommandError):
        s.apply("set_direction", {"direction": [1.0, 1.0]})
    with pytest.raises(CommandError):
        s.apply("set_direction", {"direction": [0.0, 0.0]})
    s.apply("set_direction", {"direction": [math.sqrt(0.5), -math.sqrt(0.5)]})


def test_unknown_command_rejected():
    s = _teleop()
    with pytest.raises(CommandError):
        s.apply("warp", {"to": [0, 0]})


def test_gain_commands_are_clamped():
    s = _teleop()
    s.apply("set_Kb", {"value": 7.0})
    assert s.sim.drive.schedule.k_backward == 1.0
    s.apply("set_Kf", {"value": -3.0})
    assert s.sim.drive.schedule.k_forward == 0.0


def test_bench_scenario_refuses_teleop():
    s = Session("dc_pull", seed=0, cfg=CFG)
    with pytest.raises(CommandError):
        s.apply("set_pull", {"pull": 0.3})


def test_reset_rebuilds_and_clears_the_log():
    s = _teleop()
    s.apply("set_pull", {"pull": 1.0})
    s.step(500)
    moved = s.sim.state.position
    s.apply("reset")
    assert s.sim.state.time == 0.0
    assert s.sim.state.position != moved
    assert s.log == []
    assert not s.finished


def test_frame_shape():
    s = _teleop()
    s.step(200)
    f = s.frame()
    assert f["v"] == 1
    assert f["step"] == 200
    assert len(f["currents"]) == len(CFG.array.coils)
    assert set(f["forces"]) == {"magnetic", "impact", "friction", "drag", "needle"}
    assert f["tissue"]["throughs"] == 0
    g = s.frame()
    assert g["seq"] == f["seq"] + 1


def test_session_finishes_at_duration():
    s = Session("dc_pull", seed=0, cfg=CFG)
    s.run_to_end()
    assert s.finished
    assert s.sim.state.time >= s.scn.duration
