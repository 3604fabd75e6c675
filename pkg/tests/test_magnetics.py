"""Field model checks against independent oracles."""

import math

import numpy as np
import pytest
from scipy.special import ellipe, ellipk

from impactneedle.config import build_coil_array, build_needle_design
from impactneedle.magnetics import (Coil, CoilArray, coil_field,
                                    currents_for_command, field_and_gradient,
                                    magnetic_force, max_pull_force)

B_NOM = 3.0e-3


def _loop_field(radius, current, rho, z):
    """Off-axis field of a single circular loop (elliptic integrals).

    Returns (B_rho, B_z).  Standard result, e.g. Smythe; independent of the
    dipole code under test.
    """
    mu0 = 4e-7 * math.pi
    a = radius
    q = (a + rho) ** 2 + z ** 2
    m = 4.0 * a * rho / q
    kk, ee = ellipk(m), ellipe(m)
    pref = mu0 * current / (2.0 * math.pi * math.sqrt(q))
    d = (a - rho) ** 2 + z ** 2
    bz = pref * (kk + (a * a - rho * rho - z * z) / d * ee)
    if abs(rho) < 1e-12:
        return 0.0, bz
    brho = pref * z / rho * (-kk + (a * a + rho * rho + z * z) / d * ee)
    return brho, bz


def solenoid_field(coil, current, point, n_loops=200):
    """Biot-Savart field of the finite air-core solenoid behind `coil`."""
    px = point[0] - coil.position[0]
    py = point[1] - coil.position[1]
    nx, ny = coil.axis
    zs = np.linspace(-coil.length / 2.0, coil.length / 2.0, n_loops)
    i_per_loop = current * coil.turns / n_loops
    bx = by = 0.0
    for z0 in zs:
        # loop center sits at z0 along the axis
        dx, dy = px - z0 * nx, py - z0 * ny
        z = dx * nx + dy * ny
        rho_x, rho_y = dx - z * nx, dy - z * ny
        rho = math.hypot(rho_x, rho_y)
        brho, bz = _loop_field(coil.mean_radius, i_per_loop, rho, z)
        if rho > 1e-12:
            ux, uy = rho_x / rho, rho_y / rho
        else:
            ux = uy = 0.0
        bx += bz * nx + brho * ux
        by += bz * ny + brho * uy
    return np.array([bx, by])


@pytest.fixture(scope="module")
def array():
    return build_coil_array()


@pytest.fixture(scope="module")
def magnet():
    return build_needle_design().magnet


def test_dipole_tracks_biot_savart_far_field():
    # Air-core coil vs the full winding.  The finite-size corrections decay
    # as (size/r)^2: for this winding (length 60 mm, mean radius 45.75 mm)
    # the reduction is within 5% beyond ~4 mean radii and ~9% at 3 radii,
    # with the worst direction on-axis.
    coil = Coil(position=(0.0, 0.0), axis=(1.0, 0.0), turns=648,
                mean_radius=0.04575, length=0.060, core_gain=1.0,
                max_current=2.0)
    r = coil.mean_radius
    for dist, tol in ((3.0 * r, 0.09), (4.0 * r, 0.05), (6.0 * r, 0.05),
                      (10.0 * r, 0.01)):
        for ang in (0.0, 0.4, 1.1, 2.0, math.pi / 2, 2.8):
            p = (dist * math.cos(ang), dist * math.sin(ang))
            b_dip = np.array(coil_field(coil, 1.7, p).B)
            b_sol = solenoid_field(coil, 1.7, p)
            err = np.linalg.norm(b_dip - b_sol) / np.linalg.norm(b_sol)
            assert err <= tol, (dist, ang, err)


def test_gradient_matches_finite_differences(array):
    rng = np.random.default_rng(3)
    h = 2.0e-5
    for _ in range(20):
        p = rng.uniform(-0.03, 0.03, 2)
        cur = rng.uniform(-2, 2, 4)
        g = np.array(field_and_gradient(array, cur, p).grad)
        fd = np.empty((2, 2))
        for j in range(2):
            dp = np.zeros(2)
            dp[j] = h
            bp = np.array(field_and_gradient(array, cur, p + dp).B)
            bm = np.array(field_and_gradient(array, cur, p - dp).B)
            fd[:, j] = (bp - bm) / (2.0 * h)
        assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) <= 1e-6


def test_field_linear_in_currents(array):
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = rng.uniform(-0.03, 0.03, 2)
        i1 = rng.uniform(-2, 2, 4)
        i2 = rng.uniform(-2, 2, 4)
        a, b = rng.uniform(-3, 3, 2)
        lhs = np.array(field_and_gradient(array, a * i1 + b * i2, p).B)
        rhs = (a * np.array(field_and_gradient(array, i1, p).B) +
               b * np.array(field_and_gradient(array, i2, p).B))
        scale = max(np.max(np.abs(rhs)), 1e-30)
        assert np.max(np.abs(lhs - rhs)) / scale <= 1e-12


def test_force_linear_in_current_scaling(array, magnet):
    # DC force doubles exactly when every channel doubles
    cur = np.array([1.0, -0.4, 0.7, 0.2])
    p = (0.01, -0.005)
    h = (1.0, 0.0)
    f1 = np.array(magnetic_force(magnet, h, field_and_gradient(array, cur, p)))
    f2 = np.array(magnetic_force(magnet, h,
                                 field_and_gradient(array, 2.0 * cur, p)))
    assert np.max(np.abs(f2 - 2.0 * f1)) / np.max(np.abs(f2)) <= 1e-9


def test_max_pull_center_is_18mN(array, magnet):
    f = max_pull_force(array, magnet, (0.0, 0.0), (1.0, 0.0), B_NOM)
    assert f == pytest.approx(0.018, rel=1e-6)


def test_command_currents_realize_command(array, magnet):
    # solve, then push the currents back through the forward model
    for point, dire, pull in [((0.0, 0.0), (1.0, 0.0), 0.5),
                              ((0.01, -0.008), (0.6, 0.8), 0.7),
                              ((-0.02, 0.004), (-1.0, 0.0), -0.15)]:
        d = np.array(dire) / np.linalg.norm(dire)
        cur, clipped = currents_for_command(array, magnet, point, tuple(d),
                                            pull, B_NOM)
        assert not clipped
        fs = field_and_gradient(array, cur, point)
        b = np.array(fs.B)
        assert b @ d == pytest.approx(B_NOM, rel=1e-6)
        assert abs(b[0] * -d[1] + b[1] * d[0]) <= 1e-9 * B_NOM
        f = np.array(magnetic_force(magnet, d, fs))
        f_max = max_pull_force(array, magnet, point, tuple(d), B_NOM)
        assert f @ d == pytest.approx(pull * f_max, rel=1e-6)
        # perpendicular force is constrained to zero on this path
        assert abs(f[0] * -d[1] + f[1] * d[0]) <= 1e-9 * abs(f_max)


def test_currents_respect_channel_limits(array, magnet):
    cur, _ = currents_for_command(array, magnet, (0.0, 0.0), (1.0, 0.0),
                                  1.0, B_NOM)
    assert np.all(np.abs(cur) <= array.current_limits + 1e-12)


def test_bad_inputs_raise(array, magnet):
    with pytest.raises(ValueError):
        currents_for_command(array, magnet, (0.0, 0.0), (1.0, 0.0), 1.5, B_NOM)
    with pytest.raises(ValueError):
        field_and_gradient(array, [1.0, 2.0], (0.0, 0.0))
    with pytest.raises(ValueError):
        Coil(position=(0, 0), axis=(2.0, 0.0), turns=10, mean_radius=0.01,
             length=0.01, core_gain=1.0, max_current=1.0)
