"""Coupled piston/needle dynamics in the dish plane.

The needle is a rigid tube (2 translational DOF + heading) with a permanent
magnet sliding inside it along the tube axis.  The magnet ("piston") is the
only magnetically driven part; it couples to the tube through side-load
Coulomb friction, a small viscous film term, and hard contacts with the nose
plate (forward) and the cap (backward).  Contacts are resolved with a
constant-force deceleration spread over a short impact window, followed by an
inelastic merge, so linear momentum is bookkept exactly.

Integration is semi-implicit Euler at a fixed dt, with the fluid drag terms
implicit.  The field is evaluated at the needle center and cached between
refreshes; the piston excursion (a couple of mm) is small against the coil
distance, so the per-phase force is treated as position-independent along the
stroke.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .design import NeedleDesign
from .magnetics import CoilArray, FieldSample, currents_for_command, field_and_gradient


# ---------------------------------------------------------------------------
# schedule


@dataclass(frozen=True)
class ActuationSchedule:
    """Square-wave hammer drive: forward for the first duty*period of each period."""

    duty: float
    period: float
    k_forward: float = 1.0
    k_backward: float = 0.27

    def __post_init__(self):
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must lie in (0, 1)")
        if self.period <= 0.0:
            raise ValueError("period must be positive")


def schedule_coefficient(schedule: ActuationSchedule, t: float) -> float:
    """Signed pull fraction at time t: +k_forward first, then -k_backward."""
    phase = t % schedule.period
    if phase < schedule.duty * schedule.period:
        return schedule.k_forward
    return -schedule.k_backward


# ---------------------------------------------------------------------------
# simulation state and force record


@dataclass
class SimState:
    time: float
    position: tuple[float, float]        # needle (tube) center, m
    heading: tuple[float, float]         # unit vector, tip direction
    velocity: tuple[float, float]        # needle velocity, m/s
    omega: float                         # heading rate, rad/s
    piston_offset: float                 # m, along heading, 0 = tube center
    piston_velocity: float               # m/s, relative to the tube, along heading
    pressed: int                         # +1 on plate, -1 on cap, 0 free
    currents: tuple[float, ...]


@dataclass(frozen=True)
class ForceBreakdown:
    """Forces at one instant.  F_impact and F_fi act on the piston; their
    reactions act on the needle.  F_needle = F_m + F_fi + F_d - F_impact is
    the net force the assembly transmits forward through the tip."""

    F_m: tuple[float, float]
    F_impact: tuple[float, float]
    F_fi: tuple[float, float]
    F_d: tuple[float, float]
    T_m: float
    T_d: float

    @property
    def F_needle(self) -> tuple[float, float]:
        return (self.F_m[0] + self.F_fi[0] + self.F_d[0] - self.F_impact[0],
                self.F_m[1] + self.F_fi[1] + self.F_d[1] - self.F_impact[1])


@dataclass(frozen=True)
class ImpactEvent:
    time: float
    side: str            # "plate" or "cap"
    rel_speed: float     # piston approach speed, m/s (magnitude)
    peak_force: float    # peak axial F_needle during the window, signed
                         # (positive toward the tip for plate hits)


@dataclass
class Trajectory:
    """Down-sampled record of a run plus the full impact-event list."""

    sample_dt: float
    times: list[float] = field(default_factory=list)
    states: list[SimState] = field(default_factory=list)
    forces: list[ForceBreakdown] = field(default_factory=list)
    events: list[ImpactEvent] = field(default_factory=list)
    penetrations: list = field(default_factory=list)  # tissue crossing events
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# dynamics parameters


@dataclass(frozen=True)
class DynamicsParams:
    dt: float = 1e-5                 # s, integration step
    dt_impact: float = 3.58e-5       # s, contact deceleration window
    mu_load: float = 0.82            # Coulomb coefficient on the magnetic side load
    piston_viscous: float = 0.01261  # N s/m, piston film damping
    v_eps: float = 1e-4              # m/s, tanh regularization of stick/slip
    needle_drag: float = 3.6         # N s/m, translational drag of the assembly
    needle_rot_drag: float = 1e-5    # N m s, rotational drag
    b_nom: float = 3e-3              # T, alignment field magnitude
    field_refresh: int = 20          # steps between field cache refreshes
    impact_substeps: int = 10

    def __post_init__(self):
        if self.dt <= 0 or self.dt_impact <= 0:
            raise ValueError("time steps must be positive")


# ---------------------------------------------------------------------------
# drive models (what sets the coil currents while stepping)


class IdleDrive:
    """All channels off."""

    def currents(self, t, pos, direction, n):
        return (0.0,) * n, False


class FixedCurrentDrive:
    """Constant current vector (DC bench drive)."""

    def __init__(self, currents):
        self._c = tuple(float(c) for c in currents)

    def currents(self, t, pos, direction, n):
        return self._c, False


class FixedScheduleDrive:
    """Open-loop hammer drive: two precomputed current vectors, switched by the
    schedule.  This is the bench configuration - the currents are solved once
    (normally for the dish center) and do not track the needle."""

    def __init__(self, schedule: ActuationSchedule, forward_currents, backward_currents):
        self.schedule = schedule
        self._fwd = tuple(float(c) for c in forward_currents)
        self._bwd = tuple(float(c) for c in backward_currents)
        self._last_sign = 0

    def currents(self, t, pos, direction, n):
        sign = 1 if schedule_coefficient(self.schedule, t) > 0 else -1
        changed = sign != self._last_sign
        self._last_sign = sign
        return (self._fwd if sign > 0 else self._bwd), changed

    def reset(self):
        self._last_sign = 0


class CommandDrive:
    """Closed-loop teleop drive.

    Holds a commanded direction, pull fraction and hammer on/off flag, and
    re-solves the coil currents at the live needle pose whenever the command
    or the hammer phase changes.
    """

    def __init__(self, array: CoilArray, design: NeedleDesign, b_nom: float,
                 schedule: ActuationSchedule):
        self.array = array
        self.magnet = design.magnet
        self.b_nom = b_nom
        self.schedule = schedule
        self.direction = (1.0, 0.0)
        self.pull = 0.0
        self.hammer = False
        self._pulse_until = -1.0
        self._pulse_dir = (0.0, 1.0)
        self._pulse_pull = 0.0
        self._cached = None
        self._last_sign = 0
        self._dirty = True
        self._solve_pos = (0.0, 0.0)
        # re-solve when the needle strays this far from the last solve pose,
        # so a long DC cruise keeps tracking the commanded direction
        self.resolve_distance = 0.5e-3

    def set_direction(self, direction):
        n = math.hypot(direction[0], direction[1])
        if n < 1e-12:
            raise ValueError("zero direction")
        self.direction = (direction[0] / n, direction[1] / n)
        self._dirty = True

    def set_pull(self, pull):
        self.pull = max(-1.0, min(1.0, float(pull)))
        self._dirty = True

    def set_hammer(self, on: bool):
        self.hammer = bool(on)
        self._dirty = True

    def set_backward_coefficient(self, k_backward: float):
        self.schedule = replace(self.schedule, k_backward=k_backward)
        self._dirty = True

    def set_forward_coefficient(self, k_forward: float):
        self.schedule = replace(self.schedule, k_forward=k_forward)
        self._dirty = True

    def pulse_torque(self, t, sign: int, pull: float, duration: float):
        """Briefly command a pull perpendicular to the heading (steering kick)."""
        d = self.direction
        self._pulse_dir = (-d[1] * sign, d[0] * sign)
        self._pulse_pull = pull
        self._pulse_until = t + duration
        self._dirty = True

    def currents(self, t, pos, direction, n):
        changed = self._dirty
        if t < self._pulse_until:
            target_dir, k = self._pulse_dir, self._pulse_pull
            changed = changed or self._last_sign != 2
            self._last_sign = 2
        elif self.hammer:
            k = schedule_coefficient(self.schedule, t)
            sign = 1 if k > 0 else -1
            changed = changed or sign != self._last_sign
            self._last_sign = sign
            target_dir = self.direction
        else:
            target_dir, k = self.direction, self.pull
            changed = changed or self._last_sign != 0
            self._last_sign = 0
        if not changed and self._cached is not None:
            dx = pos[0] - self._solve_pos[0]
            dy = pos[1] - self._solve_pos[1]
            if dx * dx + dy * dy > self.resolve_distance ** 2:
                changed = True
        if changed or self._cached is None:
            x, _ = currents_for_command(self.array, self.magnet, pos,
                                        target_dir, k, self.b_nom)
            self._cached = tuple(float(v) for v in x)
            self._solve_pos = (pos[0], pos[1])
            self._dirty = False
        return self._cached, changed


# ---------------------------------------------------------------------------
# simulator


class Simulator:
    """Fixed-step integrator for one needle in the coil array."""

    def __init__(self, array: CoilArray, design: NeedleDesign,
                 params: DynamicsParams, drive, *, tissue=None,
                 locked: bool = False, state: SimState | None = None):
        self.array = array
        self.design = design
        self.params = params
        self.drive = drive
        self.tissue = tissue
        self.locked = locked
        n = len(array.coils)
        self.state = state or SimState(
            time=0.0, position=(0.0, 0.0), heading=(1.0, 0.0),
            velocity=(0.0, 0.0), omega=0.0, piston_offset=0.0,
            piston_velocity=0.0, pressed=0, currents=(0.0,) * n)
        self.step_index = 0
        self.events: list[ImpactEvent] = []
        # impulse of every external force actually applied; free mode only
        self.external_impulse = [0.0, 0.0]
        self._sample: FieldSample | None = None
        self._field_age = 10**9
        # scalar per-coil constants for the fast field path
        self._pre = [(c.position[0], c.position[1], c.axis[0], c.axis[1],
                      c.moment_per_amp) for c in array.coils]
        self._last_breakdown = ForceBreakdown((0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                                              (0.0, 0.0), 0.0, 0.0)

    # -- field ------------------------------------------------------------

    def _refresh_field(self, currents):
        x, y = self.state.position
        bx = by = gxx = gxy = gyy = 0.0
        k1 = 1e-7  # mu0 / 4 pi
        for (cx, cy, ax, ay, mpa), cur in zip(self._pre, currents):
            if cur == 0.0:
                continue
            rx, ry = x - cx, y - cy
            r2 = rx * rx + ry * ry
            r = math.sqrt(r2)
            nx, ny = rx / r, ry / r
            mm = mpa * cur
            mx, my = mm * ax, mm * ay
            s = mx * nx + my * ny
            k3 = k1 / (r2 * r)
            bx += k3 * (3.0 * s * nx - mx)
            by += k3 * (3.0 * s * ny - my)
            g = 3.0 * k1 / (r2 * r2)
            gxx += g * (2.0 * nx * mx + s * (1.0 - 5.0 * nx * nx))
            gxy += g * (nx * my + mx * ny - 5.0 * s * nx * ny)
            gyy += g * (2.0 * ny * my + s * (1.0 - 5.0 * ny * ny))
        self._sample = FieldSample(B=(bx, by), grad=((gxx, gxy), (gxy, gyy)))
        self._field_age = 0

    def field_sample(self) -> FieldSample:
        """Exact field at the needle center for the current currents (no cache)."""
        return field_and_gradient(self.array, self.state.currents, self.state.position)

    # -- pieces -----------------------------------------------------------

    def _magnetic(self):
        """(F_m on the piston, T_m on the assembly) from the cached field."""
        st = self.state
        mm = self.design.magnet.dipole_moment
        mx, my = mm * st.heading[0], mm * st.heading[1]
        g = self._sample.grad
        fx = g[0][0] * mx + g[0][1] * my
        fy = g[1][0] * mx + g[1][1] * my
        b = self._sample.B
        return fx, fy, mx * b[1] - my * b[0]

    def _friction(self, w, f_mag):
        """Friction force on the piston along the axis at relative speed w."""
        p = self.params
        return -math.tanh(w / p.v_eps) * p.mu_load * f_mag - p.piston_viscous * w

    def _make_breakdown(self, fmx, fmy, f_imp, ffi, drag, tm, hx, hy):
        return ForceBreakdown(
            F_m=(fmx, fmy), F_impact=(f_imp * hx, f_imp * hy),
            F_fi=(ffi * hx, ffi * hy), F_d=drag,
            T_m=tm, T_d=-self.params.needle_rot_drag * self.state.omega)

    def _integrate_needle(self, dt, va, vp, f_ax, f_perp, m_ax, tm, fmx, fmy, tis):
        """Advance needle translation + rotation; returns the new axial velocity.

        f_ax acts on the axial mass m_ax, f_perp on the full assembly mass.
        Drag is implicit.  Also maintains the external-impulse ledger.
        """
        st = self.state
        p = self.params
        hx, hy = st.heading
        mn, mp = self.design.tube_mass, self.design.piston_mass
        va_new = (va + dt * f_ax / m_ax) / (1.0 + dt * p.needle_drag / m_ax)
        vp_new = (vp + dt * f_perp / (mn + mp)) / (1.0 + dt * p.needle_drag / (mn + mp))
        vx_new = va_new * hx - vp_new * hy
        vy_new = va_new * hy + vp_new * hx
        self.external_impulse[0] += dt * (fmx + tis[0]) - dt * p.needle_drag * vx_new
        self.external_impulse[1] += dt * (fmy + tis[1]) - dt * p.needle_drag * vy_new
        st.velocity = (vx_new, vy_new)
        st.position = (st.position[0] + dt * vx_new, st.position[1] + dt * vy_new)
        inertia = self.design.moment_of_inertia
        om = (st.omega + dt * tm / inertia) / (1.0 + dt * p.needle_rot_drag / inertia)
        st.omega = om
        if om != 0.0:
            dth = dt * om
            c, s = math.cos(dth), math.sin(dth)
            hx2, hy2 = hx * c - hy * s, hx * s + hy * c
            nrm = math.hypot(hx2, hy2)
            e_new = (hx2 / nrm, hy2 / nrm)
            # piston momentum transported by the rotating axis: the tube guide
            # supplies that transverse force, so it joins the external ledger
            self.external_impulse[0] += mp * st.piston_velocity * (e_new[0] - hx)
            self.external_impulse[1] += mp * st.piston_velocity * (e_new[1] - hy)
            st.heading = e_new
        return va_new

    # -- main step --------------------------------------------------------

    def step(self):
        st = self.state
        p = self.params
        dt = p.dt

        currents, changed = self.drive.currents(
            st.time, st.position, st.heading, len(self.array.coils))
        st.currents = currents
        if changed or self._field_age >= p.field_refresh:
            self._refresh_field(currents)
        self._field_age += 1

        hx, hy = st.heading
        fmx, fmy, tm = self._magnetic()
        f_mag = math.hypot(fmx, fmy)
        fa = fmx * hx + fmy * hy          # magnetic force along the axis
        fperp = -fmx * hy + fmy * hx      # and across it

        mn = self.design.tube_mass
        mp = self.design.piston_mass

        vx, vy = st.velocity
        va = vx * hx + vy * hy
        vp = -vx * hy + vy * hx
        drag = (-p.needle_drag * vx, -p.needle_drag * vy)

        if st.pressed != 0:
            bd = self._make_breakdown(fmx, fmy, 0.0, 0.0, drag, tm, hx, hy)
            tis = self.tissue.reaction(self, bd) if self.tissue is not None else (0.0, 0.0)
            tis_ax = tis[0] * hx + tis[1] * hy
            tis_pp = -tis[0] * hy + tis[1] * hx
            if self.locked:
                a_axial = 0.0
            else:
                va_new = self._integrate_needle(
                    dt, va, vp, fa + tis_ax, fperp + tis_pp, mn + mp,
                    tm, fmx, fmy, tis)
                a_axial = (va_new - va) / dt
            # contact normal from the piston's own axial balance
            if st.pressed * (fa - mp * a_axial) < 0.0:
                st.pressed = 0
            self._last_breakdown = bd
        else:
            w = st.piston_velocity
            ffi = self._friction(w, f_mag)
            bd = self._make_breakdown(fmx, fmy, 0.0, ffi, drag, tm, hx, hy)
            tis = self.tissue.reaction(self, bd) if self.tissue is not None else (0.0, 0.0)
            tis_ax = tis[0] * hx + tis[1] * hy
            tis_pp = -tis[0] * hy + tis[1] * hx
            if self.locked:
                a_axial = 0.0
            else:
                va_new = self._integrate_needle(
                    dt, va, vp, -ffi + tis_ax, fperp + tis_pp, mn,
                    tm, fmx, fmy, tis)
                a_axial = (va_new - va) / dt
            w_new = w + dt * ((fa + ffi) / mp - a_axial)
            s_new = st.piston_offset + dt * w_new
            xc = self.design.x_crit
            if s_new > xc and w_new > 0.0:
                self._resolve_contact(+1, w_new)
            elif s_new < -xc and w_new < 0.0:
                self._resolve_contact(-1, w_new)
            else:
                st.piston_offset = s_new
                st.piston_velocity = w_new
            self._last_breakdown = bd

        if self.tissue is not None:
            self.tissue.enforce(self)
        if not self.locked:
            self._enforce_dish_wall()
        st.time += dt
        self.step_index += 1

    def _enforce_dish_wall(self):
        """Keep the whole needle inside the petri dish (rigid wall, inelastic)."""
        st = self.state
        rmax = self.array.workspace_radius
        for px, py in (self.tip_position(), self.tail_position()):
            r = math.hypot(px, py)
            if r > rmax:
                ux, uy = px / r, py / r
                over = r - rmax
                st.position = (st.position[0] - over * ux,
                               st.position[1] - over * uy)
                v_out = st.velocity[0] * ux + st.velocity[1] * uy
                if v_out > 0.0:
                    st.velocity = (st.velocity[0] - v_out * ux,
                                   st.velocity[1] - v_out * uy)

    def _resolve_contact(self, side: int, w_hit: float):
        """Constant-force deceleration over dt_impact, then inelastic merge."""
        st = self.state
        p = self.params
        mn, mp = self.design.tube_mass, self.design.piston_mass
        target = side * self.design.x_crit
        # locate the contact point on the (linear) intra-step motion by bisection
        s0 = st.piston_offset
        lo, hi = 0.0, 1.0
        while (hi - lo) * abs(w_hit) * p.dt > 1e-9:
            mid = 0.5 * (lo + hi)
            if side * (s0 + mid * p.dt * w_hit) < side * target:
                lo = mid
            else:
                hi = mid
        st.piston_offset = target
        v_rel = w_hit
        f_imp = -mp * v_rel / p.dt_impact  # on the piston, axial
        sub = p.dt_impact / p.impact_substeps
        w = v_rel
        peak = 0.0
        for _ in range(p.impact_substeps):
            hx, hy = st.heading
            fmx, fmy, tm = self._magnetic()
            fa = fmx * hx + fmy * hy
            fperp = -fmx * hy + fmy * hx
            ffi = self._friction(w, math.hypot(fmx, fmy))
            drag = (-p.needle_drag * st.velocity[0], -p.needle_drag * st.velocity[1])
            bd = self._make_breakdown(fmx, fmy, f_imp, ffi, drag, tm, hx, hy)
            tis = self.tissue.reaction(self, bd) if self.tissue is not None else (0.0, 0.0)
            fn = bd.F_needle
            tip_axial = fn[0] * hx + fn[1] * hy
            if abs(tip_axial) > abs(peak):
                peak = tip_axial
            if self.locked:
                a_ax = 0.0
            else:
                vx, vy = st.velocity
                va = vx * hx + vy * hy
                vpp = -vx * hy + vy * hx
                tis_ax = tis[0] * hx + tis[1] * hy
                tis_pp = -tis[0] * hy + tis[1] * hx
                va_new = self._integrate_needle(
                    sub, va, vpp, -ffi - f_imp + tis_ax, fperp + tis_pp, mn,
                    tm, fmx, fmy, tis)
                a_ax = (va_new - va) / sub
            w = w + sub * ((fa + ffi + f_imp) / mp - a_ax)
            st.time += sub
        # inelastic merge of the residual relative motion (momentum exact)
        if not self.locked and w != 0.0:
            hx, hy = st.heading
            dva = mp * w / (mn + mp)
            st.velocity = (st.velocity[0] + dva * hx, st.velocity[1] + dva * hy)
        st.piston_velocity = 0.0
        st.piston_offset = target
        # stay pressed while the axial drive keeps pushing into the wall
        fmx, fmy, _ = self._magnetic()
        fa = fmx * st.heading[0] + fmy * st.heading[1]
        st.pressed = side if side * fa > 0.0 else 0
        self.events.append(ImpactEvent(
            time=st.time, side="plate" if side > 0 else "cap",
            rel_speed=abs(v_rel), peak_force=peak))

    # -- running ----------------------------------------------------------

    def run(self, duration: float, sample_every: int = 100,
            stop_when=None) -> Trajectory:
        """Step for `duration` seconds, recording every `sample_every` steps."""
        n_steps = int(round(duration / self.params.dt))
        traj = Trajectory(sample_dt=self.params.dt * sample_every)
        ev0 = len(self.events)
        for i in range(n_steps):
            self.step()
            if i % sample_every == 0:
                traj.times.append(self.state.time)
                traj.states.append(replace(self.state))
                traj.forces.append(self._last_breakdown)
            if stop_when is not None and stop_when(self):
                break
        traj.events = self.events[ev0:]
        if self.tissue is not None:
            traj.penetrations = list(self.tissue.crossings)
        return traj

    # -- observables ------------------------------------------------------

    def momentum(self):
        """Total linear momentum of tube + piston."""
        st = self.state
        mn, mp = self.design.tube_mass, self.design.piston_mass
        return ((mn + mp) * st.velocity[0] + mp * st.piston_velocity * st.heading[0],
                (mn + mp) * st.velocity[1] + mp * st.piston_velocity * st.heading[1])

    def kinetic_energy(self):
        st = self.state
        mn, mp = self.design.tube_mass, self.design.piston_mass
        v2 = st.velocity[0] ** 2 + st.velocity[1] ** 2
        vpx = st.velocity[0] + st.piston_velocity * st.heading[0]
        vpy = st.velocity[1] + st.piston_velocity * st.heading[1]
        inertia = self.design.moment_of_inertia
        return (0.5 * mn * v2 + 0.5 * mp * (vpx * vpx + vpy * vpy)
                + 0.5 * inertia * st.omega ** 2)

    def tip_position(self):
        st = self.state
        h = self.design.half_length
        return (st.position[0] + h * st.heading[0], st.position[1] + h * st.heading[1])

    def tail_position(self):
        st = self.state
        h = 0.5 * self.design.tube_length
        return (st.position[0] - h * st.heading[0], st.position[1] - h * st.heading[1])

    @property
    def last_forces(self) -> ForceBreakdown:
        return self._last_breakdown


def force_balance(sim: Simulator) -> ForceBreakdown:
    """Force breakdown at the simulator's current state (field recomputed)."""
    sim._refresh_field(sim.state.currents)
    st = sim.state
    fmx, fmy, tm = sim._magnetic()
    w = st.piston_velocity if st.pressed == 0 else 0.0
    ffi = sim._friction(w, math.hypot(fmx, fmy)) if st.pressed == 0 else 0.0
    drag = (-sim.params.needle_drag * st.velocity[0],
            -sim.params.needle_drag * st.velocity[1])
    return sim._make_breakdown(fmx, fmy, 0.0, ffi, drag, tm,
                               st.heading[0], st.heading[1])
