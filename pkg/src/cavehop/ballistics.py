"""Ballistic hop kinematics and propellant budgeting for hopping rovers.

A hop is a point-mass ballistic arc in uniform gravity with no drag:
the rover launches with velocity v0, coasts, and cancels its touchdown
velocity with a second burn.  Both burns are impulsive, so the cost of a
hop is |v0| + |vf| in delta-v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

G0_STANDARD = 9.80665  # m/s^2, standard gravity used in the rocket equation
MOON_GRAVITY = 1.62  # m/s^2, lunar surface
MARS_GRAVITY = 3.71  # m/s^2, martian surface


@dataclass(frozen=True)
class FuelBudget:
    """Propulsion stack parameters for the rocket equation."""

    isp_s: float = 350.0
    initial_mass_kg: float = 3.0
    propellant_mass_kg: float = 1.0
    g0: float = G0_STANDARD

    def __post_init__(self):
        if self.isp_s <= 0.0:
            raise ValueError(f"specific impulse must be positive, got {self.isp_s}")
        if self.initial_mass_kg <= 0.0:
            raise ValueError("initial mass must be positive")
        if not (0.0 < self.propellant_mass_kg < self.initial_mass_kg):
            raise ValueError(
                "propellant mass must be positive and below the initial mass"
            )
        if self.g0 <= 0.0:
            raise ValueError("g0 must be positive")


@dataclass(frozen=True)
class HopPlan:
    """Fully resolved ballistic transfer between two floor points."""

    displacement: tuple[float, float]
    transfer_time: float
    launch_velocity: tuple[float, float, float]
    touchdown_velocity: tuple[float, float, float]
    delta_v_launch: float
    delta_v_landing: float

    @property
    def total_delta_v(self) -> float:
        return self.delta_v_launch + self.delta_v_landing


def hop_velocity(
    displacement: tuple[float, float], g: float, transfer_time: float
) -> tuple[float, float, float]:
    """Launch velocity reaching the displacement in the given transfer time.

    Horizontal components cover the displacement at constant speed; the
    vertical component is chosen so the arc returns to the launch height
    exactly at transfer_time.
    """
    if transfer_time <= 0.0:
        raise ValueError(f"transfer time must be positive, got {transfer_time}")
    if g <= 0.0:
        raise ValueError(f"gravity must be positive, got {g}")
    dx, dy = displacement
    return (dx / transfer_time, dy / transfer_time, g * transfer_time / 2.0)


def optimal_transfer_time(distance: float, g: float) -> float:
    """Transfer time minimizing total delta-v for a flat-ground hop.

    Minimizing 2*sqrt(d^2/t^2 + g^2 t^2 / 4) over t gives t = sqrt(2 d / g),
    the 45-degree launch.
    """
    if distance <= 0.0:
        raise ValueError(f"hop distance must be positive, got {distance}")
    if g <= 0.0:
        raise ValueError(f"gravity must be positive, got {g}")
    return math.sqrt(2.0 * distance / g)


def hop_cost(distance: float, g: float) -> float:
    """Total delta-v of a fuel-optimal hop covering the distance: 2*sqrt(g*d)."""
    if distance <= 0.0:
        raise ValueError(f"hop distance must be positive, got {distance}")
    if g <= 0.0:
        raise ValueError(f"gravity must be positive, got {g}")
    return 2.0 * math.sqrt(g * distance)


def plan_hop(
    displacement: tuple[float, float], g: float, transfer_time: float | None = None
) -> HopPlan:
    """Resolve a hop to a flat-ground ballistic plan.

    When transfer_time is omitted the fuel-optimal time for the hop
    distance is used.  Landing occurs at launch height, so the touchdown
    velocity mirrors launch with the vertical component reversed and the
    two burn costs are equal.
    """
    dx, dy = displacement
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError("hop displacement must be non-zero")
    if transfer_time is None:
        transfer_time = optimal_transfer_time(d, g)
    vx, vy, vz = hop_velocity(displacement, g, transfer_time)
    launch = (vx, vy, vz)
    touchdown = (vx, vy, vz - g * transfer_time)
    dv1 = math.sqrt(vx * vx + vy * vy + vz * vz)
    dv2 = math.sqrt(
        touchdown[0] ** 2 + touchdown[1] ** 2 + touchdown[2] ** 2
    )
    return HopPlan(
        displacement=(dx, dy),
        transfer_time=transfer_time,
        launch_velocity=launch,
        touchdown_velocity=touchdown,
        delta_v_launch=dv1,
        delta_v_landing=dv2,
    )


def trajectory_points(
    origin: tuple[float, float],
    launch_velocity: tuple[float, float, float],
    g: float,
    transfer_time: float,
    n: int = 50,
) -> np.ndarray:
    """Sample the arc at n evenly spaced times from launch to touchdown.

    Returns an (n, 3) array of (x, y, z) points with z measured above the
    floor; the first row is the origin and the last is the landing point.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if transfer_time <= 0.0:
        raise ValueError(f"transfer time must be positive, got {transfer_time}")
    t = np.linspace(0.0, transfer_time, n)
    vx, vy, vz = launch_velocity
    x = origin[0] + vx * t
    y = origin[1] + vy * t
    z = vz * t - 0.5 * g * t * t
    return np.column_stack((x, y, z))


def delta_v_budget(budget: FuelBudget) -> float:
    """Total delta-v available from the propellant load (rocket equation)."""
    m0 = budget.initial_mass_kg
    mf = m0 - budget.propellant_mass_kg
    return budget.isp_s * budget.g0 * math.log(m0 / mf)


def hop_budget(
    budget: FuelBudget, g_body: float, hop_distance: float
) -> tuple[int, float]:
    """Number of fuel-optimal hops of a fixed distance the budget affords.

    Returns (hop_count, total_delta_v).  The count is the floor of the
    budget divided by the per-hop cost on the given body.
    """
    total = delta_v_budget(budget)
    per_hop = hop_cost(hop_distance, g_body)
    return (int(math.floor(total / per_hop)), total)
