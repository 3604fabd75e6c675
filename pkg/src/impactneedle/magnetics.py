"""Planar magnetic field / force model for a four-coil electromagnet array.

Each coil is reduced to a point dipole at its center, with moment along the
coil axis.  A soft-iron core multiplies the bare coil moment by a constant
gain.  The workspace is the horizontal mid-plane of the array, so all
positions, fields, forces and gradients live in 2D.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

MU0 = 4.0e-7 * math.pi
_K = MU0 / (4.0 * math.pi)  # 1e-7


@dataclass(frozen=True)
class Coil:
    """One electromagnet: position/axis in the workspace plane plus winding data."""

    position: tuple[float, float]   # m, dipole location (coil center)
    axis: tuple[float, float]       # unit vector, moment direction for i > 0
    turns: int
    mean_radius: float              # m, mean winding radius
    length: float                   # m, winding stack length (documentation only)
    core_gain: float                # dimensionless moment multiplier, >= 1
    max_current: float              # A, per-channel amplifier limit

    def __post_init__(self):
        ax = math.hypot(*self.axis)
        if abs(ax - 1.0) > 1e-9:
            raise ValueError("coil axis must be a unit vector")
        if self.turns <= 0 or self.mean_radius <= 0 or self.max_current <= 0:
            raise ValueError("turns, mean_radius and max_current must be positive")
        if self.core_gain < 1.0:
            raise ValueError("core_gain must be >= 1")

    @property
    def moment_per_amp(self) -> float:
        """|m|/i in A*m^2: core gain times N*i*A for the mean winding area."""
        return self.core_gain * self.turns * math.pi * self.mean_radius**2


@dataclass(frozen=True)
class CoilArray:
    coils: tuple[Coil, ...]
    workspace_radius: float  # m, petri-dish radius; positions are kept inside

    def __post_init__(self):
        if len(self.coils) == 0:
            raise ValueError("empty coil array")

    @property
    def current_limits(self) -> np.ndarray:
        return np.array([c.max_current for c in self.coils])


@dataclass(frozen=True)
class MagnetBody:
    """Cylindrical permanent magnet, axially magnetized."""

    radius: float         # m
    length: float         # m
    magnetization: float  # A/m
    density: float        # kg/m^3

    @property
    def volume(self) -> float:
        return math.pi * self.radius**2 * self.length

    @property
    def mass(self) -> float:
        return self.density * self.volume

    @property
    def dipole_moment(self) -> float:
        return self.magnetization * self.volume


@dataclass(frozen=True)
class FieldSample:
    """Field and in-plane gradient at one point.

    grad[i][j] = dB_i/dx_j.  The in-plane block of a 3D dipole gradient is not
    trace-free (the missing divergence sits in the out-of-plane component), so
    no trace normalization is applied here.
    """

    B: tuple[float, float]
    grad: tuple[tuple[float, float], tuple[float, float]]


def coil_field(coil: Coil, current: float, point) -> FieldSample:
    """Dipole field and gradient of one coil at `point`, for a given current.

    Both outputs are exactly linear in `current`.
    """
    px, py = float(point[0]), float(point[1])
    rx = px - coil.position[0]
    ry = py - coil.position[1]
    r = math.hypot(rx, ry)
    if r < 1e-9:
        raise ValueError("field evaluated at a coil center")
    nx, ny = rx / r, ry / r
    mm = coil.moment_per_amp * current
    mx, my = mm * coil.axis[0], mm * coil.axis[1]
    s = mx * nx + my * ny  # m . n
    k3 = _K / r**3
    bx = k3 * (3.0 * s * nx - mx)
    by = k3 * (3.0 * s * ny - my)
    # dB_i/dx_j = 3 mu0/(4 pi r^4) [ n_i m_j + m_i n_j + (m.n)(delta_ij - 5 n_i n_j) ]
    g = 3.0 * _K / r**4
    gxx = g * (2.0 * nx * mx + s * (1.0 - 5.0 * nx * nx))
    gxy = g * (nx * my + mx * ny - 5.0 * s * nx * ny)
    gyy = g * (2.0 * ny * my + s * (1.0 - 5.0 * ny * ny))
    return FieldSample(B=(bx, by), grad=((gxx, gxy), (gxy, gyy)))


def field_and_gradient(array: CoilArray, currents, point) -> FieldSample:
    """Superposed field/gradient of the whole array at `point`."""
    if len(currents) != len(array.coils):
        raise ValueError("one current per coil required")
    bx = by = gxx = gxy = gyy = 0.0
    for coil, i in zip(array.coils, currents):
        s = coil_field(coil, float(i), point)
        bx += s.B[0]
        by += s.B[1]
        gxx += s.grad[0][0]
        gxy += s.grad[0][1]
        gyy += s.grad[1][1]
    return FieldSample(B=(bx, by), grad=((gxx, gxy), (gxy, gyy)))


def magnetic_force(magnet: MagnetBody, heading, sample: FieldSample) -> tuple[float, float]:
    """Gradient pull on the magnet, F = (m . grad) B with m = V*M along `heading`.

    The dipole gradient is symmetric in-plane, so this equals grad(m . B).
    """
    mm = magnet.dipole_moment
    mx, my = mm * heading[0], mm * heading[1]
    g = sample.grad
    return (g[0][0] * mx + g[0][1] * my, g[1][0] * mx + g[1][1] * my)


def magnetic_torque(magnet: MagnetBody, heading, sample: FieldSample) -> float:
    """Out-of-plane alignment torque m x B (scalar z component)."""
    mm = magnet.dipole_moment
    return mm * (heading[0] * sample.B[1] - heading[1] * sample.B[0])


def _perp(v):
    return (-v[1], v[0])


def _unit(v):
    n = math.hypot(v[0], v[1])
    if n < 1e-12:
        raise ValueError("zero direction vector")
    return (v[0] / n, v[1] / n)


def _command_matrices(array: CoilArray, magnet: MagnetBody, point, direction):
    """Per-unit-current field rows (2xN) and force rows (2xN) at `point`.

    Force rows assume the magnet is aligned with `direction`, which is the
    steady state the current solver targets.
    """
    n = len(array.coils)
    gb = np.zeros((2, n))
    gf = np.zeros((2, n))
    mm = magnet.dipole_moment
    mx, my = mm * direction[0], mm * direction[1]
    for k, coil in enumerate(array.coils):
        s = coil_field(coil, 1.0, point)
        gb[0, k], gb[1, k] = s.B
        g = s.grad
        gf[0, k] = g[0][0] * mx + g[0][1] * my
        gf[1, k] = g[1][0] * mx + g[1][1] * my
    return gb, gf


@functools.lru_cache(maxsize=64)
def _max_pull_cached(array: CoilArray, magnet: MagnetBody, point, direction, b_nom):
    direction = _unit(direction)
    gb, gf = _command_matrices(array, magnet, point, direction)
    t = _perp(direction)
    a_eq = np.vstack([t[0] * gb[0] + t[1] * gb[1],
                      direction[0] * gb[0] + direction[1] * gb[1]])
    b_eq = np.array([0.0, b_nom])
    # maximize pull along `direction` subject to field alignment and amp limits
    c = -(direction[0] * gf[0] + direction[1] * gf[1])
    lim = array.current_limits
    res = linprog(c, A_eq=a_eq, b_eq=b_eq,
                  bounds=list(zip(-lim, lim)), method="highs")
    if not res.success:
        raise RuntimeError(f"pull-force LP failed: {res.message}")
    return -res.fun, tuple(res.x)


def max_pull_force(array: CoilArray, magnet: MagnetBody, point, direction,
                   b_nom: float) -> float:
    """Largest achievable gradient pull along `direction` at `point`.

    Maximizes the aligned-magnet pull over coil currents subject to the
    perpendicular field vanishing, the parallel field equal to b_nom, and the
    per-channel current limits.  Linear program, solved exactly.
    """
    f, _ = _max_pull_cached(array, magnet, tuple(point), tuple(direction), b_nom)
    return f


def currents_for_command(array: CoilArray, magnet: MagnetBody, point, direction,
                         pull: float, b_nom: float):
    """Coil currents realizing a heading + pull command at a point.

    Solves the 4-equality system: zero field perpendicular to `direction`,
    b_nom along it, zero force perpendicular to it, and pull * F_max along
    it (F_max is the pose's LP force ceiling).  The force rows are demanded
    at the largest fraction beta in [0, 1] that keeps every channel inside
    its current limit: the solution splits into a field-only part plus beta
    times a force part (both min-norm least squares), so the realized force
    is beta * pull * F_max exactly along `direction` and the alignment field
    is exact regardless of beta.  Per-channel clamping or whole-vector
    rescaling would instead rotate the field or the force off the command,
    which turns the needle the wrong way.

    Returns (currents, clipped); clipped means beta < 1.
    """
    direction = _unit(direction)
    if not -1.0 <= pull <= 1.0:
        raise ValueError("pull must lie in [-1, 1]")
    f_max, _ = _max_pull_cached(array, magnet, tuple(point),
                                direction, b_nom)
    gb, gf = _command_matrices(array, magnet, point, direction)
    t = _perp(direction)
    a = np.vstack([
        t[0] * gb[0] + t[1] * gb[1],
        direction[0] * gb[0] + direction[1] * gb[1],
        t[0] * gf[0] + t[1] * gf[1],
        direction[0] * gf[0] + direction[1] * gf[1],
    ])
    # row-normalize for conditioning; rows have wildly different units
    scale = np.linalg.norm(a, axis=1)
    scale[scale < 1e-30] = 1.0
    an = a / scale[:, None]
    rhs_field = np.array([0.0, b_nom, 0.0, 0.0]) / scale
    rhs_force = np.array([0.0, 0.0, 0.0, pull * f_max]) / scale
    u, *_ = np.linalg.lstsq(an, rhs_field, rcond=1e-10)
    w, *_ = np.linalg.lstsq(an, rhs_force, rcond=1e-10)
    lim = np.asarray(array.current_limits, dtype=float)
    # symmetric poses leave the system rank-deficient: shift along the null
    # space of the constraint rows while maximizing beta, so the channel
    # limits bind as late as possible
    sv = np.linalg.svd(an, compute_uv=False)
    _, _, vt = np.linalg.svd(an)
    rank = int(np.sum(sv > sv[0] * 1e-10)) if sv[0] > 0.0 else 0
    null = vt[rank:]
    k = null.shape[0]
    n = len(lim)
    a_ub = np.zeros((2 * n, 1 + k))
    a_ub[:n, 0], a_ub[n:, 0] = w, -w
    if k:
        a_ub[:n, 1:], a_ub[n:, 1:] = null.T, -null.T
    b_ub = np.concatenate([lim - u, lim + u])
    cost = np.zeros(1 + k)
    cost[0] = -1.0
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(0.0, 1.0)] + [(None, None)] * k,
                  method="highs")
    if res.success:
        beta = float(res.x[0])
        shift = null.T @ res.x[1:] if k else 0.0
    else:
        # limits already violated by the field-only part; degrade gracefully
        beta, shift = 1.0, 0.0
        for ui, wi, li in zip(u, w, lim):
            if wi > 1e-15:
                beta = min(beta, (li - ui) / wi)
            elif wi < -1e-15:
                beta = min(beta, (-li - ui) / wi)
        beta = max(0.0, beta)
    return u + beta * w + shift, bool(beta < 1.0 - 1e-9)
