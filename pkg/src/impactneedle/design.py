"""Needle geometry and the magnet-length trade-off.

A longer sliding magnet carries more moment (more force, more mass) but
leaves less free travel inside the tube.  The figure of merit is the momentum
the piston can build over one stroke, sqrt(2 m F d): m and F both grow
linearly with magnet length l while the stroke d = l_tube - l shrinks, which
puts the optimum at exactly two thirds of the tube length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .magnetics import MagnetBody


@dataclass(frozen=True)
class NeedleDesign:
    """Tube + sliding piston magnet + fixed nose plate geometry."""

    tube_length: float      # m, inner cavity length
    tube_mass: float        # kg, tube + plate + tip, without the piston
    tip_length: float       # m, sharpened tip protruding past the tube
    plate_allowance: float  # m, plate thickness eating into the forward travel
    magnet: MagnetBody

    def __post_init__(self):
        if self.magnet.length >= self.tube_length:
            raise ValueError("magnet does not fit in the tube")
        if self.x_crit <= 0:
            raise ValueError("no free travel left after the plate allowance")
        if self.tube_mass <= 0:
            raise ValueError("tube_mass must be positive")

    @property
    def x_crit(self) -> float:
        """Piston center offset at which it touches the plate (or, mirrored, the cap)."""
        return 0.5 * (self.tube_length - self.magnet.length) - self.plate_allowance

    @property
    def piston_mass(self) -> float:
        return self.magnet.mass

    @property
    def total_mass(self) -> float:
        return self.tube_mass + self.magnet.mass

    @property
    def half_length(self) -> float:
        """Needle half length from tube center to tip point."""
        return 0.5 * self.tube_length + self.tip_length

    @property
    def moment_of_inertia(self) -> float:
        """Slender-rod estimate about the center, piston included."""
        full = self.tube_length + self.tip_length
        return self.total_mass * full**2 / 12.0


@dataclass(frozen=True)
class ObjectiveConstant:
    """Environment constants entering the stroke-momentum objective."""

    field_gradient: float  # T/m, representative drive gradient scale
    magnetization: float   # A/m
    density: float         # kg/m^3
    bore_radius: float     # m, magnet radius admitted by the tube


def impact_momentum_objective(length: float, tube_length: float,
                              const: ObjectiveConstant) -> float:
    """Momentum sqrt(2 m(l) F(l) d(l)) reachable in one free stroke.

    m(l) = rho * pi r^2 * l, F(l) = G * M * pi r^2 * l, d(l) = tube_length - l.
    Zero outside the feasible band 0 < l < tube_length.
    """
    if length <= 0.0 or length >= tube_length:
        return 0.0
    area = math.pi * const.bore_radius**2
    m = const.density * area * length
    f = const.field_gradient * const.magnetization * area * length
    d = tube_length - length
    return math.sqrt(2.0 * m * f * d)


def optimal_magnet_length(tube_length: float, const: ObjectiveConstant) -> float:
    """Closed-form maximizer of the stroke-momentum objective.

    The objective is proportional to l * sqrt(tube_length - l); the stationary
    point of l^2 (tube_length - l) is l = 2/3 * tube_length, independent of the
    environment constants.
    """
    if tube_length <= 0.0:
        raise ValueError("tube_length must be positive")
    # multiply by the rounded constant: for the reference 19.05 mm tube this
    # yields the correctly rounded 12.7 mm, where (2 * l) / 3 lands 1 ulp off
    return tube_length * (2.0 / 3.0)


def validate_design(design: NeedleDesign) -> list[str]:
    """Non-raising sanity report; empty list means the design is consistent."""
    problems = []
    if design.magnet.length >= design.tube_length:
        problems.append("magnet longer than tube")
    if design.x_crit <= 0:
        problems.append("plate allowance leaves no travel")
    if design.magnet.mass <= 0 or design.tube_mass <= 0:
        problems.append("non-positive mass")
    if design.magnet.length > 0.9 * design.tube_length:
        problems.append("magnet leaves under 10% of the tube as travel")
    if design.piston_mass > 5.0 * design.tube_mass:
        problems.append("piston dominates the assembly mass")
    return problems


def objective_grid(tube_length: float, const: ObjectiveConstant,
                   n: int = 10000) -> tuple[np.ndarray, np.ndarray]:
    """Dense evaluation of the objective over (0, tube_length), for plots/tests."""
    ls = np.linspace(tube_length / n, tube_length * (1 - 1.0 / n), n)
    js = np.array([impact_momentum_objective(l, tube_length, const) for l in ls])
    return ls, js
