"""Built-in scenarios: bench characterization poses and the two tissue demos.

Each scenario builds a ready-to-run `Simulator` plus a termination predicate
and metadata.  The tissue demos drive the needle closed loop through the
same command interface the teleop service uses, so a recorded command log
replays to the identical trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .characterization import bench_simulator, dc_pull_test
from .config import RigConfig
from .dynamics import CommandDrive, SimState, Simulator, Trajectory
from .tissue import TissueField, TissueSegment, record_suture


@dataclass
class Scenario:
    name: str
    sim: Simulator
    duration: float
    description: str
    stop_when: object = None          # callable(sim) -> bool, or None
    controller: object = None         # callable(sim) run each step, or None
    tissue: TissueField | None = None


def _toward_center(pose):
    n = math.hypot(pose[0], pose[1])
    return (1.0, 0.0) if n < 1e-12 else (-pose[0] / n, -pose[1] / n)


def _free_sim(cfg: RigConfig, position, heading, tissue=None) -> Simulator:
    drive = CommandDrive(cfg.array, cfg.design, cfg.params.b_nom, cfg.schedule)
    drive.set_direction(heading)
    n = len(cfg.array.coils)
    state = SimState(time=0.0, position=tuple(position), heading=tuple(heading),
                     velocity=(0.0, 0.0), omega=0.0, piston_offset=0.0,
                     piston_velocity=0.0, pressed=0, currents=(0.0,) * n)
    return Simulator(cfg.array, cfg.design, cfg.params, drive,
                     tissue=tissue, state=state)


# ---------------------------------------------------------------------------
# bench scenarios


def center_hammer(cfg: RigConfig, dwell: float = 5.0) -> Scenario:
    sim = bench_simulator(cfg, (0.0, 0.0), (1.0, 0.0), cfg.schedule)
    return Scenario(name="center_hammer", sim=sim, duration=dwell,
                    description="locked needle at the dish center, hammer on")


def far_end_hammer(cfg: RigConfig, dwell: float = 5.0) -> Scenario:
    pose = cfg.far_end
    sim = bench_simulator(cfg, pose, _toward_center(pose), cfg.schedule)
    return Scenario(name="far_end_hammer", sim=sim, duration=dwell,
                    description="locked needle at the dish edge, hammer on")


def dc_pull(cfg: RigConfig, dwell: float = 0.5) -> Scenario:
    from .dynamics import FixedCurrentDrive
    from .magnetics import currents_for_command
    cur, _ = currents_for_command(cfg.array, cfg.design.magnet, (0.0, 0.0),
                                  (1.0, 0.0), 1.0, cfg.params.b_nom)
    n = len(cfg.array.coils)
    state = SimState(time=0.0, position=(0.0, 0.0), heading=(1.0, 0.0),
                     velocity=(0.0, 0.0), omega=0.0, piston_offset=0.0,
                     piston_velocity=0.0, pressed=0, currents=(0.0,) * n)
    sim = Simulator(cfg.array, cfg.design, cfg.params, FixedCurrentDrive(cur),
                    locked=True, state=state)
    return Scenario(name="dc_pull", sim=sim, duration=dwell,
                    description="locked needle, full DC pull, no hammer")


# ---------------------------------------------------------------------------
# bacon penetration


class _BaconController:
    """DC cruise to the face, then hammer.  Pull-only cruising is much faster
    than hammering in free fluid, so the hammer stays off until contact."""

    def __init__(self, face_x: float):
        self.face_x = face_x
        self.on = False

    def __call__(self, sim):
        if not self.on and sim.tip_position()[0] > self.face_x - 1.0e-3:
            sim.drive.set_pull(0.0)
            sim.drive.set_hammer(True)
            self.on = True
        return False


def bacon_penetration(cfg: RigConfig, seed: int = 0, hammer: bool = True,
                      target_depth: float = 11.8e-3,
                      timeout: float = 60.0) -> Scenario:
    """Needle a few mm short of a bacon face near the dish center.

    DC approach, hammer from face contact on.  With `hammer=False` the run
    is the control: full DC push against the face, which never ruptures.
    """
    # face placed so the hammering needle body crosses the strongest-field
    # band: the bench peak tops out a few mm past center toward the +x coil,
    # and the full 11.8 mm stroke (needle center -2.5 -> +9.3 mm) stays on it
    face_x = 10.0e-3
    model = cfg.tissues["bacon"]
    # p0 -> p1 ordering puts the "front" face toward -x, where the needle starts
    seg = TissueSegment(model=model, p0=(face_x, 0.02), p1=(face_x, -0.02))
    tissue = TissueField([seg], seed=seed)
    start_x = face_x - cfg.design.half_length - 4.0e-3
    sim = _free_sim(cfg, (start_x, 0.0), (1.0, 0.0), tissue=tissue)
    sim.drive.set_pull(1.0)

    def done(s):
        return tissue.max_depth >= target_depth

    return Scenario(name="bacon_penetration", sim=sim, duration=timeout,
                    description="free needle hammering into a bacon face",
                    stop_when=done, tissue=tissue,
                    controller=_BaconController(face_x) if hammer else None)


# ---------------------------------------------------------------------------
# running suture


class SutureController:
    """Three-pass running stitch through an agar+gauze strip at x = 0.

    Drives the same command interface as teleoperation.  Passes run along
    horizontal target lines y = 0, -pitch, -2*pitch; cruising and hammering
    both steer the commanded direction to hold the line (the solved force
    field is only exact at the solve pose, so open-loop runs drift).  Each
    pass cruises under DC pull, hammers through the strip on contact,
    cruises on until the tail has cleared, then turns around with two
    field-alignment steps.
    """

    TURN_WAIT = 1.2       # s per alignment step
    CLEAR_X = 0.0145      # m, tube center when the tail has cleared the strip
    PITCH = 3.0e-3        # m, stitch spacing down the strip
    STEER_GAIN = 150.0    # 1/m, lateral error -> direction bias
    STEER_CAP = 0.35      # max direction bias (~20 deg)
    CRUISE_PULL = 0.97    # stay below the saturated solve, which trades off lateral force

    def __init__(self, cfg: RigConfig, tissue: TissueField):
        self.cfg = cfg
        self.tissue = tissue
        self.half = cfg.design.half_length
        self.phase = "cruise1"
        self.t_mark = 0.0
        self.done = False
        self._line_y = 0.0
        self._line_dir = 1.0          # +-1, travel sense along x
        self._last_cmd = (1.0, 0.0)

    def _through(self):
        return sum(1 for c in self.tissue.crossings if c.kind == "through")

    def _steer(self, sim):
        """Bias the commanded direction to close on the pass line."""
        e = sim.state.position[1] - self._line_y
        b = max(-self.STEER_CAP, min(self.STEER_CAP, self.STEER_GAIN * e))
        cx, cy = self._line_dir, -b
        n = math.hypot(cx, cy)
        cx, cy = cx / n, cy / n
        lx, ly = self._last_cmd
        if (cx - lx) ** 2 + (cy - ly) ** 2 > 1e-4:
            sim.drive.set_direction((cx, cy))
            self._last_cmd = (cx, cy)

    def _set_dir(self, sim, d):
        sim.drive.set_direction(d)
        self._last_cmd = d

    def __call__(self, sim: Simulator):
        drive = sim.drive
        st = sim.state
        t = st.time
        tip_x = sim.tip_position()[0]
        if self.phase == "cruise1":
            self._steer(sim)
            if tip_x > -1.0e-3:
                drive.set_pull(0.0)
                drive.set_hammer(True)
                self.phase = "hammer1"
        elif self.phase == "hammer1":
            self._steer(sim)
            if self._through() >= 1 and tip_x > 4.0e-3:
                drive.set_hammer(False)
                drive.set_pull(self.CRUISE_PULL)
                self.phase = "cruise1b"
        elif self.phase == "cruise1b":
            self._steer(sim)
            if st.position[0] > self.CLEAR_X:
                drive.set_pull(0.0)
                self._set_dir(sim, (0.0, -1.0))
                self.phase, self.t_mark = "turn1a", t
        elif self.phase == "turn1a":
            if t - self.t_mark > self.TURN_WAIT:
                self._set_dir(sim, (-1.0, 0.0))
                self.phase, self.t_mark = "turn1b", t
        elif self.phase == "turn1b":
            if t - self.t_mark > self.TURN_WAIT:
                drive.set_pull(self.CRUISE_PULL)
                self._line_y, self._line_dir = -self.PITCH, -1.0
                self.phase = "cruise2"
        elif self.phase == "cruise2":
            self._steer(sim)
            if tip_x < 1.0e-3:
                drive.set_pull(0.0)
                drive.set_hammer(True)
                self.phase = "hammer2"
        elif self.phase == "hammer2":
            self._steer(sim)
            if self._through() >= 2 and tip_x < -4.0e-3:
                drive.set_hammer(False)
                drive.set_pull(self.CRUISE_PULL)
                self.phase = "cruise2b"
        elif self.phase == "cruise2b":
            self._steer(sim)
            if st.position[0] < -self.CLEAR_X - 1.0e-3:
                drive.set_pull(0.0)
                self._set_dir(sim, (0.0, -1.0))
                self.phase, self.t_mark = "turn2a", t
        elif self.phase == "turn2a":
            if t - self.t_mark > self.TURN_WAIT:
                self._set_dir(sim, (1.0, 0.0))
                self.phase, self.t_mark = "turn2b", t
        elif self.phase == "turn2b":
            if t - self.t_mark > self.TURN_WAIT:
                drive.set_pull(self.CRUISE_PULL)
                self._line_y, self._line_dir = -2.0 * self.PITCH, 1.0
                self.phase = "cruise3"
        elif self.phase == "cruise3":
            self._steer(sim)
            if tip_x > -1.0e-3:
                drive.set_pull(0.0)
                drive.set_hammer(True)
                self.phase = "hammer3"
        elif self.phase == "hammer3":
            self._steer(sim)
            if self._through() >= 3 and tip_x > 4.0e-3:
                drive.set_hammer(False)
                drive.set_pull(self.CRUISE_PULL)
                self.phase = "cruise3b"
        elif self.phase == "cruise3b":
            self._steer(sim)
            if st.position[0] > self.CLEAR_X:
                drive.set_pull(0.0)
                self.phase = "done"
                self.done = True
        return self.done


def running_suture(cfg: RigConfig, seed: int = 0,
                   timeout: float = 400.0) -> Scenario:
    model = cfg.tissues["agar_gauze"]
    # p0 -> p1 ordering puts the "front" face toward -x, where pass 1 starts
    seg = TissueSegment(model=model, p0=(0.0, 0.008), p1=(0.0, -0.020))
    tissue = TissueField([seg], seed=seed)
    start_x = -(cfg.design.half_length + 4.0e-3)
    sim = _free_sim(cfg, (start_x, 0.0), (1.0, 0.0), tissue=tissue)
    sim.drive.set_pull(SutureController.CRUISE_PULL)
    sim.drive.set_forward_coefficient(SutureController.CRUISE_PULL)
    ctrl = SutureController(cfg, tissue)

    return Scenario(name="running_suture", sim=sim, duration=timeout,
                    description="three-pass running stitch through agar+gauze",
                    stop_when=lambda s: ctrl.done, controller=ctrl,
                    tissue=tissue)


# ---------------------------------------------------------------------------
# free teleoperation


def teleop(cfg: RigConfig, seed: int = 0, duration: float = 600.0) -> Scenario:
    """Free needle at the dish center under operator commands only."""
    model = cfg.tissues["agar_gauze"]
    seg = TissueSegment(model=model, p0=(0.015, 0.014), p1=(0.015, -0.014))
    tissue = TissueField([seg], seed=seed)
    sim = _free_sim(cfg, (-cfg.design.half_length, 0.0), (1.0, 0.0),
                    tissue=tissue)
    return Scenario(name="teleop", sim=sim, duration=duration,
                    description="operator-driven session, agar strip at x=15mm",
                    tissue=tissue)


# ---------------------------------------------------------------------------
# registry / runner


def build_scenario(cfg: RigConfig, name: str, seed: int = 0, **kw) -> Scenario:
    builders = {
        "teleop": lambda: teleop(cfg, seed=seed, **kw),
        "center_hammer": lambda: center_hammer(cfg, **kw),
        "far_end_hammer": lambda: far_end_hammer(cfg, **kw),
        "dc_pull": lambda: dc_pull(cfg, **kw),
        "bacon_penetration": lambda: bacon_penetration(cfg, seed=seed, **kw),
        "running_suture": lambda: running_suture(cfg, seed=seed, **kw),
    }
    if name not in builders:
        raise KeyError(f"unknown scenario {name!r}; have {sorted(builders)}")
    return builders[name]()


def scenario_names() -> list[str]:
    return ["teleop", "center_hammer", "far_end_hammer", "dc_pull",
            "bacon_penetration", "running_suture"]


def run_scenario(scn: Scenario, sample_every: int = 100) -> Trajectory:
    sim = scn.sim
    n_steps = int(round(scn.duration / sim.params.dt))
    traj = Trajectory(sample_dt=sim.params.dt * sample_every)
    ev0 = len(sim.events)
    from dataclasses import replace as _rep
    for i in range(n_steps):
        if scn.controller is not None:
            scn.controller(sim)
        sim.step()
        if i % sample_every == 0:
            traj.times.append(sim.state.time)
            traj.states.append(_rep(sim.state))
            traj.forces.append(sim.last_forces)
        if scn.stop_when is not None and scn.stop_when(sim):
            break
    traj.events = sim.events[ev0:]
    if scn.tissue is not None:
        traj.penetrations = list(scn.tissue.crossings)
        traj.meta["max_depth"] = scn.tissue.max_depth
    traj.meta["scenario"] = scn.name
    traj.meta["sim_time"] = sim.state.time
    return traj
