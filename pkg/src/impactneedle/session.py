"""Interactive simulation sessions: command log, state frames, replay.

A Session owns one simulator and is single-threaded: commands are applied
between integrator steps and recorded with the step index at which they took
effect, so a recorded log replays bit-identically.  Scripted scenario
controllers drive the same command recorder as interactive operators, which
gives scripted and interactive runs one shared replay path.
"""

from __future__ import annotations

import hashlib
import math
import struct

from .config import RigConfig, build_default
from .scenarios import build_scenario

LOG_VERSION = 1
FRAME_VERSION = 1


class CommandError(ValueError):
    """Malformed or unknown teleop command."""


def _clamp01(x) -> float:
    return max(0.0, min(1.0, float(x)))


class _RecordingDrive:
    """Forwards drive commands and records them against the step counter."""

    def __init__(self, inner, session):
        self._inner = inner
        self._session = session

    def _record(self, kind, payload):
        s = self._session
        s.log.append({"seq": s.seq, "step": s.sim.step_index,
                      "kind": kind, "payload": payload})
        s.seq += 1

    def set_direction(self, direction):
        self._record("set_direction",
                     {"direction": [float(direction[0]), float(direction[1])]})
        self._inner.set_direction(direction)

    def set_pull(self, pull):
        self._record("set_pull", {"pull": float(pull)})
        self._inner.set_pull(pull)

    def set_hammer(self, on):
        self._record("hammer_on" if on else "hammer_off", {})
        self._inner.set_hammer(on)

    def set_backward_coefficient(self, k):
        self._record("set_Kb", {"value": float(k)})
        self._inner.set_backward_coefficient(k)

    def set_forward_coefficient(self, k):
        self._record("set_Kf", {"value": float(k)})
        self._inner.set_forward_coefficient(k)

    def pulse_torque(self, t, sign, pull, duration):
        self._record("pulse_torque", {"sign": int(sign), "pull": float(pull),
                                      "duration": float(duration)})
        self._inner.pulse_torque(t, sign, pull, duration)

    def currents(self, t, pos, direction, n):
        return self._inner.currents(t, pos, direction, n)

    def __getattr__(self, name):
        return getattr(self._inner, name)


class Session:
    """A live (or replaying) simulation run with a command log.

    `scripted=True` attaches the scenario's built-in controller (if any);
    its drive calls land in the same log as interactive commands, so the
    log alone reproduces the run.
    """

    def __init__(self, scenario: str, seed: int = 0,
                 cfg: RigConfig | None = None, scripted: bool = True,
                 sample_every: int = 100):
        self.cfg = cfg if cfg is not None else build_default()
        self.scenario_name = scenario
        self.seed = seed
        self.scripted = scripted
        self.sample_every = sample_every
        self.log: list[dict] = []
        self.seq = 0
        self.frame_seq = 0
        self._hash = hashlib.sha256()
        self._build()

    def _build(self):
        self.scn = build_scenario(self.cfg, self.scenario_name, seed=self.seed)
        self.sim = self.scn.sim
        self.controller = self.scn.controller if self.scripted else None
        self.sim.drive = _RecordingDrive(self.sim.drive, self)
        self.finished = False

    # -- commands ----------------------------------------------------------

    def apply(self, kind: str, payload: dict | None = None) -> dict:
        """Apply one teleop command now; returns an acknowledgment."""
        payload = payload or {}
        drive = self.sim.drive
        try:
            if kind == "set_direction":
                d = payload["direction"]
                n = math.hypot(float(d[0]), float(d[1]))
                if abs(n - 1.0) > 1e-9:
                    raise CommandError("direction must be unit-norm")
                drive.set_direction((float(d[0]), float(d[1])))
            elif kind == "set_pull":
                drive.set_pull(max(-1.0, min(1.0, float(payload["pull"]))))
            elif kind == "set_Kb":
                drive.set_backward_coefficient(_clamp01(payload["value"]))
            elif kind == "set_Kf":
                drive.set_forward_coefficient(_clamp01(payload["value"]))
            elif kind == "hammer_on":
                drive.set_hammer(True)
            elif kind == "hammer_off":
                drive.set_hammer(False)
            elif kind == "pulse_torque":
                drive.pulse_torque(self.sim.state.time,
                                   1 if payload.get("sign", 1) >= 0 else -1,
                                   _clamp01(payload.get("pull", 0.5)),
                                   float(payload.get("duration", 0.2)))
            elif kind == "reset":
                # fresh epoch: the log describes the run since the last reset,
                # so a replay never has to cross a step-index discontinuity
                self.log = []
                self.seq = 0
                self._hash = hashlib.sha256()
                self._build()
            else:
                raise CommandError(f"unknown command kind {kind!r}")
        except CommandError:
            raise
        except AttributeError as exc:
            raise CommandError(
                f"scenario {self.scenario_name!r} does not take teleop "
                f"commands (open-loop bench drive)") from exc
        except (KeyError, TypeError, IndexError) as exc:
            raise CommandError(f"malformed {kind} payload: {exc}") from exc
        return {"applied_at": self.sim.state.time,
                "step": self.sim.step_index}

    def _replay_apply(self, entry):
        """Apply a logged command without re-recording it."""
        kind, payload = entry["kind"], entry["payload"]
        inner = self.sim.drive._inner
        if kind == "set_direction":
            inner.set_direction(tuple(payload["direction"]))
        elif kind == "set_pull":
            inner.set_pull(payload["pull"])
        elif kind == "set_Kb":
            inner.set_backward_coefficient(payload["value"])
        elif kind == "set_Kf":
            inner.set_forward_coefficient(payload["value"])
        elif kind == "hammer_on":
            inner.set_hammer(True)
        elif kind == "hammer_off":
            inner.set_hammer(False)
        elif kind == "pulse_torque":
            inner.pulse_torque(self.sim.state.time, payload["sign"],
                               payload["pull"], payload["duration"])
        else:
            raise CommandError(f"unknown logged command kind {kind!r}")

    # -- stepping ----------------------------------------------------------

    def step(self, n: int = 1):
        for _ in range(n):
            if self.finished:
                break
            if self.controller is not None:
                self.controller(self.sim)
            self.sim.step()
            if self.sim.step_index % self.sample_every == 0:
                self._hash.update(self._sample_bytes())
            st = self.sim.state
            if st.time >= self.scn.duration:
                self.finished = True
            elif self.scn.stop_when is not None and self.scn.stop_when(self.sim):
                self.finished = True

    def run_to_end(self):
        while not self.finished:
            self.step(1000)

    def _sample_bytes(self) -> bytes:
        st = self.sim.state
        return struct.pack(
            "<15d", st.time, st.position[0], st.position[1],
            st.heading[0], st.heading[1], st.velocity[0], st.velocity[1],
            st.omega, st.piston_offset, st.piston_velocity,
            float(st.pressed), *st.currents)

    def trajectory_hash(self) -> str:
        return self._hash.hexdigest()

    # -- observation -------------------------------------------------------

    def frame(self) -> dict:
        """Immutable state snapshot, safe to serialize and ship elsewhere."""
        st = self.sim.state
        fb = self.sim.last_forces
        tip = self.sim.tip_position()
        tissue = self.scn.tissue
        out = {
            "v": FRAME_VERSION,
            "seq": self.frame_seq,
            "time": st.time,
            "step": self.sim.step_index,
            "position": [st.position[0], st.position[1]],
            "heading": [st.heading[0], st.heading[1]],
            "velocity": [st.velocity[0], st.velocity[1]],
            "omega": st.omega,
            "piston_offset": st.piston_offset,
            "piston_velocity": st.piston_velocity,
            "pressed": st.pressed,
            "currents": list(st.currents),
            "tip": [float(tip[0]), float(tip[1])],
            "forces": {
                "magnetic": [fb.F_m[0], fb.F_m[1]],
                "impact": fb.F_impact,
                "friction": fb.F_fi,
                "drag": [fb.F_d[0], fb.F_d[1]],
                "needle": [fb.F_needle[0], fb.F_needle[1]],
            },
            "hammer": bool(self.sim.drive.hammer),
            "k_backward": self.sim.drive.schedule.k_backward,
            "finished": self.finished,
        }
        if tissue is not None:
            out["tissue"] = {
                "max_depth": tissue.max_depth,
                "ruptures": sum(1 for c in tissue.crossings
                                if c.kind == "rupture"),
                "throughs": sum(1 for c in tissue.crossings
                                if c.kind == "through"),
            }
            out["thread"] = [[p[0], p[1]] for p in
                             getattr(tissue, "thread_points", [])]
        self.frame_seq += 1
        return out

    # -- logging / replay --------------------------------------------------

    def log_dict(self) -> dict:
        return {"v": LOG_VERSION,
                "scenario": self.scenario_name,
                "seed": self.seed,
                "sample_every": self.sample_every,
                "steps": self.sim.step_index,
                "commands": [dict(c) for c in self.log]}


def replay(log: dict, cfg: RigConfig | None = None) -> Session:
    """Re-run a recorded command log; bit-identical to the live session.

    The scenario is rebuilt from (name, seed) and the logged commands are
    applied at their recorded step indices; the scripted controller is not
    re-run, so the log alone carries the control history.
    """
    if log.get("v") != LOG_VERSION:
        raise CommandError(f"unsupported log version {log.get('v')!r}")
    s = Session(log["scenario"], seed=log["seed"], cfg=cfg, scripted=False,
                sample_every=log["sample_every"])
    pending = sorted(log["commands"], key=lambda c: (c["step"], c["seq"]))
    i = 0
    total = log["steps"]
    while s.sim.step_index < total:
        while i < len(pending) and pending[i]["step"] == s.sim.step_index:
            s._replay_apply(pending[i])
            i += 1
        if s.controller is not None:
            s.controller(s.sim)
        s.sim.step()
        if s.sim.step_index % s.sample_every == 0:
            s._hash.update(s._sample_bytes())
    return s
