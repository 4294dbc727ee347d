"""Relative localization by chaining range-bearing measurements from the base.

Each robot can measure a neighbor's distance, the bearing to it in its
own body frame, and the difference between the two heading angles.
Folding such measurements along a relay chain anchored at the base pins
every robot's pose in the base frame without external positioning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


@dataclass(frozen=True)
class Pose:
    """Planar pose (position plus heading); heading normalized to (-pi, pi]."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class RelativeMeasurement:
    """One robot-to-robot observation expressed in the observer's frame.

    distance: straight-line range to the observed robot, >= 0.
    bearing: direction to it, measured from the observer's heading.
    heading_change: observed robot's heading minus the observer's.
    """

    distance: float
    bearing: float
    heading_change: float

    def __post_init__(self):
        if self.distance < 0.0:
            raise ValueError(f"measured distance must be >= 0, got {self.distance}")


def compose_pose(parent: Pose, meas: RelativeMeasurement) -> Pose:
    """Pose of the observed robot given the observer's pose and a measurement."""
    world_bearing = parent.heading + meas.bearing
    return Pose(
        parent.x + meas.distance * math.cos(world_bearing),
        parent.y + meas.distance * math.sin(world_bearing),
        parent.heading + meas.heading_change,
    )


def localize_chain(base: Pose, chain: Iterable[RelativeMeasurement]) -> Pose:
    """Fold measurements outward from the base along a relay chain.

    The first measurement is taken by the base, each later one by the
    robot fixed by the previous step.  An empty chain returns the base
    pose itself.
    """
    pose = base
    for meas in chain:
        pose = compose_pose(pose, meas)
    return pose


def relative_measurement(
    observer: Pose,
    target: Pose,
    noise_std: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> RelativeMeasurement:
    """Measurement the observer would take of the target (inverse of compose).

    With noise_std > 0, independent zero-mean gaussian noise of that
    standard deviation is added to each component; the noisy distance is
    clamped at zero.  Requires an rng when noise is enabled.
    """
    dx = target.x - observer.x
    dy = target.y - observer.y
    distance = math.hypot(dx, dy)
    bearing = normalize_angle(math.atan2(dy, dx) - observer.heading)
    heading_change = normalize_angle(target.heading - observer.heading)
    if noise_std > 0.0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng")
        distance = max(0.0, distance + noise_std * rng.standard_normal())
        bearing = normalize_angle(bearing + noise_std * rng.standard_normal())
        heading_change = normalize_angle(
            heading_change + noise_std * rng.standard_normal()
        )
    elif noise_std < 0.0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")
    return RelativeMeasurement(distance, bearing, heading_change)
