"""Penetrable tissue membranes for the dish plane.

A tissue sample is a line segment with a finite thickness behind it.  Until
the local rupture threshold is exceeded the face behaves as a rigid wall: the
needle tip is held on the plane and the reaction balances whatever the needle
pushes with.  Rupture is permanent and per-site; afterwards the channel
resists sliding with a force proportional to the engaged needle length,
capped at the site threshold.  Thresholds are drawn per approach site from a
clipped normal distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TissueModel:
    name: str
    strength_mean: float        # N, rupture threshold mean
    strength_std: float         # N
    thickness: float            # m, engaged depth behind the face
    resistance_per_depth: float  # N/m of engaged needle length after rupture


@dataclass(frozen=True)
class TissueSegment:
    """Tissue face: segment p0-p1; the face normal points to the 'front' side."""

    model: TissueModel
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def normal(self) -> tuple[float, float]:
        tx, ty = self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]
        n = math.hypot(tx, ty)
        return (ty / n, -tx / n)

    @property
    def span(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])


@dataclass
class PenetrationSite:
    segment: TissueSegment
    entry: tuple[float, float]
    inward: tuple[float, float]   # unit, into the tissue
    side: str                     # "front" or "back"
    threshold: float              # N
    t_open: float
    ruptured: bool = False
    through: bool = False
    closed: bool = False
    max_depth: float = 0.0


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    side: str
    entry: tuple[float, float]
    kind: str                     # "rupture" or "through"


@dataclass
class SutureRecord:
    """Thread path (needle tail trace) and the stitch crossings it made."""

    thread: list = field(default_factory=list)        # [(x, y), ...]
    crossings: list = field(default_factory=list)     # [CrossingEvent with kind "through"]
    complete: bool = False


class TissueField:
    """All tissue in the dish plus the per-site contact state."""

    # hysteresis bands for opening/abandoning an approach site.  The detach
    # band is wide so the hammer's back-stroke oscillation keeps working the
    # same approach site (one threshold draw per puncture attempt).
    _DETACH = 2e-3   # m behind the face before an approach site is dropped
    _V_EPS = 1e-4    # m/s, tanh regularization of the channel friction

    def __init__(self, segments, seed: int = 0):
        self.segments = list(segments)
        self.rng = np.random.default_rng(seed)
        self.sites: list[PenetrationSite] = []
        self.crossings: list[CrossingEvent] = []
        self._active: dict[int, PenetrationSite] = {}
        self._prev_s: dict[int, float] = {}

    # -- threshold draw ---------------------------------------------------

    def _draw_threshold(self, model: TissueModel) -> float:
        t = self.rng.normal(model.strength_mean, model.strength_std)
        return max(t, 0.1 * model.strength_mean)

    # -- per-step force (called before integration) -----------------------

    def reaction(self, sim, breakdown) -> tuple[float, float]:
        """Force on the needle from all active sites, for the current state."""
        fx = fy = 0.0
        fn = breakdown.F_needle
        vx, vy = sim.state.velocity
        for site in self._active.values():
            ix, iy = site.inward
            if not site.ruptured:
                drive = fn[0] * ix + fn[1] * iy
                if drive > site.threshold:
                    site.ruptured = True
                    self.crossings.append(CrossingEvent(
                        time=sim.state.time, side=site.side,
                        entry=site.entry, kind="rupture"))
                elif drive > 0.0:
                    fx -= drive * ix
                    fy -= drive * iy
                continue
            eng = self._engagement(sim, site)
            if eng <= 0.0:
                continue
            mag = min(site.segment.model.resistance_per_depth * eng, site.threshold)
            v_in = vx * ix + vy * iy
            f = -math.tanh(v_in / self._V_EPS) * mag
            fx += f * ix
            fy += f * iy
        return fx, fy

    def _engagement(self, sim, site) -> float:
        tip = sim.tip_position()
        tail = sim.tail_position()
        ix, iy = site.inward
        d_tip = (tip[0] - site.entry[0]) * ix + (tip[1] - site.entry[1]) * iy
        d_tail = (tail[0] - site.entry[0]) * ix + (tail[1] - site.entry[1]) * iy
        th = site.segment.model.thickness
        return max(0.0, min(d_tip, th) - max(d_tail, 0.0))

    # -- post-integration bookkeeping -------------------------------------

    def enforce(self, sim):
        tip = sim.tip_position()
        tail = sim.tail_position()
        for k, seg in enumerate(self.segments):
            nx, ny = seg.normal
            s = (tip[0] - seg.p0[0]) * nx + (tip[1] - seg.p0[1]) * ny
            site = self._active.get(k)
            if site is None:
                prev = self._prev_s.get(k)
                if prev is not None and (prev > 0.0) != (s > 0.0) and self._in_span(seg, tip):
                    side = "front" if prev > 0.0 else "back"
                    inward = (-nx, -ny) if side == "front" else (nx, ny)
                    entry = self._project_to_face(seg, tip)
                    site = PenetrationSite(
                        segment=seg, entry=entry, inward=inward, side=side,
                        threshold=self._draw_threshold(seg.model),
                        t_open=sim.state.time)
                    self.sites.append(site)
                    self._active[k] = site
                self._prev_s[k] = s
                if site is None:
                    continue
            ix, iy = site.inward
            depth = (tip[0] - site.entry[0]) * ix + (tip[1] - site.entry[1]) * iy
            if not site.ruptured:
                if depth > 0.0:
                    st = sim.state
                    v_in = st.velocity[0] * ix + st.velocity[1] * iy
                    # arriving tube momentum resolved with the same
                    # constant-deceleration contact law as the piston stops:
                    # if the equivalent force beats the threshold, the face
                    # gives way instead of stopping the needle
                    f_eq = (sim.design.tube_mass * max(v_in, 0.0)
                            / sim.params.dt_impact)
                    if f_eq > site.threshold:
                        site.ruptured = True
                        self.crossings.append(CrossingEvent(
                            time=st.time, side=site.side,
                            entry=site.entry, kind="rupture"))
                    else:
                        # rigid wall: hold the tip on the face, absorb the
                        # inward velocity component (tissue takes the momentum)
                        st.position = (st.position[0] - depth * ix,
                                       st.position[1] - depth * iy)
                        if v_in > 0.0:
                            st.velocity = (st.velocity[0] - v_in * ix,
                                           st.velocity[1] - v_in * iy)
                        depth = 0.0
                elif depth < -self._DETACH:
                    site.closed = True
                    del self._active[k]
                self._prev_s[k] = (tip[0] - seg.p0[0]) * nx + (tip[1] - seg.p0[1]) * ny
                continue
            site.max_depth = max(site.max_depth, depth)
            th = seg.model.thickness
            if depth >= th and not site.through:
                site.through = True
                self.crossings.append(CrossingEvent(
                    time=sim.state.time, side=site.side,
                    entry=site.entry, kind="through"))
            d_tail = (tail[0] - site.entry[0]) * ix + (tail[1] - site.entry[1]) * iy
            if d_tail > th or depth < -self._DETACH:
                site.closed = True
                del self._active[k]
            self._prev_s[k] = (tip[0] - seg.p0[0]) * nx + (tip[1] - seg.p0[1]) * ny

    @staticmethod
    def _in_span(seg: TissueSegment, p) -> bool:
        tx, ty = seg.p1[0] - seg.p0[0], seg.p1[1] - seg.p0[1]
        L = math.hypot(tx, ty)
        u = ((p[0] - seg.p0[0]) * tx + (p[1] - seg.p0[1]) * ty) / (L * L)
        return 0.0 <= u <= 1.0

    @staticmethod
    def _project_to_face(seg: TissueSegment, p) -> tuple[float, float]:
        nx, ny = seg.normal
        s = (p[0] - seg.p0[0]) * nx + (p[1] - seg.p0[1]) * ny
        return (p[0] - s * nx, p[1] - s * ny)

    @property
    def max_depth(self) -> float:
        return max((s.max_depth for s in self.sites), default=0.0)


def contact_reaction(field_: TissueField, sim, breakdown) -> tuple[float, float]:
    """Tissue force on the needle at the simulator's current state."""
    return field_.reaction(sim, breakdown)


def record_suture(trajectory, tissue: TissueField, design) -> SutureRecord:
    """Build the stitch record for a finished run: the thread follows the
    needle tail, and each tip-through crossing is one stitch pass."""
    rec = SutureRecord()
    half = 0.5 * design.tube_length
    for st in trajectory.states:
        hx, hy = st.heading
        # tail of the tube, where the thread is attached
        rec.thread.append((st.position[0] - half * hx,
                           st.position[1] - half * hy))
    rec.crossings = [c for c in tissue.crossings if c.kind == "through"]
    rec.complete = len(rec.crossings) >= 3
    return rec
