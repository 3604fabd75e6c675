"""Bench characterization: force sweeps, DC pull tests and calibration.

All bench runs hold the needle in a fixture attached to a virtual load cell
(translation and rotation locked) and drive the coils open loop with current
vectors solved once at the probe pose.  The load cell quantizes what it
reports, like the real sensor.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

from .config import RigConfig
from .dynamics import (ActuationSchedule, DynamicsParams, FixedCurrentDrive,
                       FixedScheduleDrive, SimState, Simulator)
from .magnetics import Coil, CoilArray, currents_for_command, max_pull_force


@dataclass(frozen=True)
class LoadCellModel:
    sample_rate: float = 1000.0   # Hz, trace output rate
    quantum: float = 5.69e-3      # N, output resolution


def quantize(force: float, cell: LoadCellModel) -> float:
    """Snap a reading to the sensor resolution (round half away from zero)."""
    q = cell.quantum
    return math.floor(abs(force) / q + 0.5) * q * (1.0 if force >= 0 else -1.0)


@dataclass(frozen=True)
class SweepGrid:
    duties: tuple[float, ...] = (0.3, 0.4, 0.5, 0.6, 0.7)
    periods: tuple[float, ...] = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35)
    dwell: float = 5.0            # s per grid cell


@dataclass(frozen=True)
class SweepCell:
    duty: float
    period: float
    mean_peak: float     # N, signed mean over all impacts (cap hits negative)
    max_peak: float      # N, largest plate-side peak
    force_density: float  # N/s, mean_peak per cycle time
    cycles: float


def bench_simulator(cfg: RigConfig, pose, direction, schedule: ActuationSchedule,
                    pull_forward: float | None = None,
                    pull_backward: float | None = None) -> Simulator:
    """Locked-needle simulator with open-loop currents solved at `pose`."""
    kf = schedule.k_forward if pull_forward is None else pull_forward
    kb = -schedule.k_backward if pull_backward is None else pull_backward
    fwd, _ = currents_for_command(cfg.array, cfg.design.magnet, pose,
                                  direction, kf, cfg.params.b_nom)
    bwd, _ = currents_for_command(cfg.array, cfg.design.magnet, pose,
                                  direction, kb, cfg.params.b_nom)
    drive = FixedScheduleDrive(schedule, fwd, bwd)
    n = len(cfg.array.coils)
    state = SimState(time=0.0, position=tuple(pose), heading=tuple(direction),
                     velocity=(0.0, 0.0), omega=0.0, piston_offset=0.0,
                     piston_velocity=0.0, pressed=0, currents=(0.0,) * n)
    return Simulator(cfg.array, cfg.design, cfg.params, drive,
                     locked=True, state=state)


def _cell_metrics(events, cell: LoadCellModel):
    """Signed mean and plate-side max of quantized per-impact peaks."""
    if not events:
        return 0.0, 0.0
    peaks = [quantize(e.peak_force, cell) for e in events]
    mean = sum(peaks) / len(peaks)
    plate = [p for e, p in zip(events, peaks) if e.side == "plate"]
    return mean, (max(plate) if plate else 0.0)


def run_sweep(cfg: RigConfig, grid: SweepGrid | None = None, pose=(0.0, 0.0),
              direction=(1.0, 0.0), cell: LoadCellModel | None = None,
              progress=None) -> list[SweepCell]:
    """Duty/period force map with the needle fixed to the load cell.

    For each grid cell the hammer runs for `grid.dwell` seconds from rest
    (piston at the tube midpoint) and every impact peak is recorded through
    the load cell.  Cap-side impacts pull on the cell and count negative, so
    settings whose return stroke slams the cap are penalized in the mean.
    """
    grid = grid or SweepGrid()
    cell = cell or LoadCellModel()
    out = []
    for duty in grid.duties:
        for period in grid.periods:
            schedule = replace(cfg.schedule, duty=duty, period=period)
            sim = bench_simulator(cfg, pose, direction, schedule)
            sim.run(grid.dwell, sample_every=10**9)
            mean, mx = _cell_metrics(sim.events, cell)
            out.append(SweepCell(
                duty=duty, period=period, mean_peak=mean, max_peak=mx,
                force_density=mean / period, cycles=grid.dwell / period))
            if progress is not None:
                progress(out[-1])
    return out


def sweep_argmax(cells: list[SweepCell]) -> SweepCell:
    return max(cells, key=lambda c: c.mean_peak)


def dc_pull_test(cfg: RigConfig, pose=(0.0, 0.0), direction=(1.0, 0.0),
                 duration: float = 0.5,
                 cell: LoadCellModel | None = None) -> float:
    """Steady pull (N) on the locked needle with a full DC command at `pose`.

    Currents are solved at the probe pose for pull = 1, so this reads the
    pose-local force ceiling through the load cell.
    """
    cell = cell or LoadCellModel()
    cur, _ = currents_for_command(cfg.array, cfg.design.magnet, pose,
                                  direction, 1.0, cfg.params.b_nom)
    n = len(cfg.array.coils)
    state = SimState(time=0.0, position=tuple(pose), heading=tuple(direction),
                     velocity=(0.0, 0.0), omega=0.0, piston_offset=0.0,
                     piston_velocity=0.0, pressed=0, currents=(0.0,) * n)
    sim = Simulator(cfg.array, cfg.design, cfg.params, FixedCurrentDrive(cur),
                    locked=True, state=state)
    sim.run(duration, sample_every=10**9)
    # steady state: piston pressed on the plate, full magnetic pull transmitted
    fn = sim.last_forces.F_needle
    axial = fn[0] * direction[0] + fn[1] * direction[1]
    return quantize(axial, cell)


def peak_impact_force(cfg: RigConfig, pose=(0.0, 0.0), direction=(1.0, 0.0),
                      schedule: ActuationSchedule | None = None,
                      dwell: float = 3.0,
                      cell: LoadCellModel | None = None) -> float:
    """Largest plate-side impact peak (N) of a locked hammer run at `pose`."""
    cell = cell or LoadCellModel()
    schedule = schedule or cfg.schedule
    sim = bench_simulator(cfg, pose, direction, schedule)
    sim.run(dwell, sample_every=10**9)
    _, mx = _cell_metrics(sim.events, cell)
    return mx


def impact_vs_dc_ratio(cfg: RigConfig, pose=(0.0, 0.0), direction=(1.0, 0.0),
                       schedule: ActuationSchedule | None = None) -> float:
    """Peak hammer force over steady DC force at one pose.

    With the piston pinned (no travel, x_crit -> 0 would give no impacts) the
    hammer degenerates to the DC pull and the ratio is 1; with the stock
    geometry it lands around 60.
    """
    dc = dc_pull_test(cfg, pose, direction)
    if dc == 0.0:
        return float("inf")
    return peak_impact_force(cfg, pose, direction, schedule) / dc


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class CalibrationReport:
    core_gain: float
    dt_impact: float
    dc_center: float          # N
    peak_center: float        # N
    dc_far: float             # N
    peak_far: float           # N
    elapsed: float            # s, wall clock


def _with_core_gain(cfg: RigConfig, gain: float) -> RigConfig:
    coils = tuple(replace(c, core_gain=gain) for c in cfg.array.coils)
    return replace(cfg, array=replace(cfg.array, coils=coils))


def calibrate(cfg: RigConfig, dc_target: float = 0.018,
              peak_target: float = 1.163) -> tuple[RigConfig, CalibrationReport]:
    """Two fixed 1-D searches, in order:

    1. core_gain, by bisection, until the center force ceiling is dc_target;
    2. dt_impact, by secant on the measured plate peak, until the center
       hammer peak is peak_target.

    Deterministic: no randomness, fixed iteration counts and ordering.
    """
    t0 = time.perf_counter()
    lo, hi = 1.0, 50.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f = max_pull_force(_with_core_gain(cfg, mid).array, cfg.design.magnet,
                           (0.0, 0.0), (1.0, 0.0), cfg.params.b_nom)
        if f < dc_target:
            lo = mid
        else:
            hi = mid
    gain = 0.5 * (lo + hi)
    cfg = _with_core_gain(cfg, gain)

    dt = cfg.params.dt_impact
    for _ in range(4):
        trial = replace(cfg, params=replace(cfg.params, dt_impact=dt))
        sim = bench_simulator(trial, (0.0, 0.0), (1.0, 0.0), trial.schedule)
        sim.run(3.0, sample_every=10**9)
        plate = [e.peak_force for e in sim.events if e.side == "plate"]
        peak = max(plate)
        if abs(peak / peak_target - 1.0) < 1e-6:
            break
        # peak ~ m v / dt + offset: rescale dt by the remaining error
        dt = dt * peak / peak_target
    cfg = replace(cfg, params=replace(cfg.params, dt_impact=dt))

    report = CalibrationReport(
        core_gain=gain, dt_impact=dt,
        dc_center=dc_pull_test(cfg),
        peak_center=peak_impact_force(cfg),
        dc_far=dc_pull_test(cfg, cfg.far_end, _toward_center(cfg.far_end)),
        peak_far=peak_impact_force(cfg, cfg.far_end, _toward_center(cfg.far_end)),
        elapsed=time.perf_counter() - t0)
    return cfg, report


def _toward_center(pose) -> tuple[float, float]:
    n = math.hypot(pose[0], pose[1])
    if n < 1e-12:
        return (1.0, 0.0)
    return (-pose[0] / n, -pose[1] / n)
