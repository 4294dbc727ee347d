"""Frontier-driven hop planning under range and connectivity constraints.

A hop is planned by picking a random frontier cell, heading straight at
it, and taking the longest hop along that ray that (a) lands in already
explored free space, (b) does not fly over a known obstacle, and (c)
keeps the comm graph connected after the move.  Connectivity comes in
two flavors: a tethered swarm must stay linked to the fixed base at all
times; a detached swarm only has to stay mutually linked and reconnects
to the base by retracing its hops later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .world import (
    Environment,
    free_boundary,
    point_in_explored,
    segment_intersects_obstacle,
)

Point = tuple[float, float]


class ConnectivityMode(Enum):
    """How the swarm's comm graph is constrained while exploring."""

    TETHERED = "tethered"  # every robot keeps a relay route to the base
    DETACHED = "detached"  # robots keep each other connected; base rejoined later


@dataclass(frozen=True)
class PlannerParams:
    """Sensing, radio, and hop geometry in world units, plus search effort."""

    vision_radius: float = 2.0
    comm_range: float = 5.0
    hop_range: float = 7.0
    mode: ConnectivityMode = ConnectivityMode.TETHERED
    max_point_attempts: int = 10
    max_robot_attempts: int = 5
    distance_samples: int = 50
    frontier_adjacency: int = 4

    def __post_init__(self):
        if self.vision_radius <= 0.0:
            raise ValueError("vision radius must be positive")
        if self.comm_range <= 0.0:
            raise ValueError("comm range must be positive")
        if self.hop_range <= 0.0:
            raise ValueError("hop range must be positive")
        if self.max_point_attempts < 1 or self.max_robot_attempts < 1:
            raise ValueError("attempt limits must be at least 1")
        if self.distance_samples < 1:
            raise ValueError("distance sample count must be at least 1")
        if self.frontier_adjacency not in (4, 8):
            raise ValueError("frontier adjacency must be 4 or 8")


@dataclass(frozen=True)
class HopDecision:
    """A feasible hop for one robot: unit direction, length, landing point."""

    robot_id: int
    direction: tuple[float, float]
    distance: float
    target: Point


def hop_direction(target_point: Point, robot_pos: Point) -> tuple[float, float]:
    """Unit vector from the robot toward the chosen frontier point."""
    dx = target_point[0] - robot_pos[0]
    dy = target_point[1] - robot_pos[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise ValueError("frontier point coincides with the robot position")
    return (dx / norm, dy / norm)


def direction_is_safe(robot_pos: Point, target_point: Point, env: Environment) -> bool:
    """Line-of-travel check against obstacles the swarm has already seen.

    Only revealed obstacles are considered: the swarm cannot avoid what
    it has never sensed.
    """
    if robot_pos == tuple(target_point):
        return False
    known = [ob for k, ob in enumerate(env.spec.obstacles) if env.revealed[k]]
    if not known:
        return True
    return not segment_intersects_obstacle(robot_pos, tuple(target_point), known)


def comm_connected(
    positions: list[Point], comm_range: float, anchor: int = 0
) -> bool:
    """True when every node reaches the anchor through range-limited links.

    The graph is the unit-disk graph with threshold comm_range; for an
    undirected graph, reachability from the anchor is equivalent to
    connectivity of the whole node set.
    """
    n = len(positions)
    if n == 0:
        return True
    if not (0 <= anchor < n):
        raise ValueError(f"anchor index {anchor} out of range for {n} nodes")
    r2 = comm_range * comm_range
    seen = [False] * n
    seen[anchor] = True
    stack = [anchor]
    while stack:
        i = stack.pop()
        xi, yi = positions[i]
        for j in range(n):
            if not seen[j]:
                dx = positions[j][0] - xi
                dy = positions[j][1] - yi
                if dx * dx + dy * dy <= r2:
                    seen[j] = True
                    stack.append(j)
    return all(seen)


def _connectivity_nodes(
    state, robot_id: int, params: PlannerParams
) -> tuple[list[Point], int, int]:
    """Node positions for the connectivity check around one robot's move.

    Returns (positions, anchor_index, moving_index).  Tethered mode
    anchors the graph at the base and includes every robot; detached mode
    covers the explorers only, anchored arbitrarily at the first
    non-moving one (connectivity does not depend on the anchor).
    """
    explorers = state.explorer_robots()
    if params.mode is ConnectivityMode.TETHERED:
        positions = [state.base_position()]
        moving = -1
        for r in explorers:
            if r.robot_id == robot_id:
                moving = len(positions)
            positions.append(r.pose.position)
        return positions, 0, moving
    positions = []
    moving = -1
    for r in explorers:
        if r.robot_id == robot_id:
            moving = len(positions)
        positions.append(r.pose.position)
    anchor = 0 if moving != 0 else (1 if len(positions) > 1 else 0)
    return positions, anchor, moving


def compute_hop_distance(
    robot_id: int,
    direction: tuple[float, float],
    state,
    params: PlannerParams,
    max_distance: float | None = None,
) -> float | None:
    """Longest feasible hop along the direction, None when every length fails.

    Candidate lengths are distance_samples evenly spaced values in
    (0, cap] tried longest first, where cap is the hop range clamped to
    max_distance (normally the distance to the chosen frontier point).
    A length is feasible when the landing cell is explored free, the
    flight segment avoids revealed obstacles, and the after-move comm
    graph stays connected for the active mode.
    """
    cap = params.hop_range if max_distance is None else min(params.hop_range, max_distance)
    if cap <= 0.0:
        return None
    env: Environment = state.env
    positions, anchor, moving = _connectivity_nodes(state, robot_id, params)
    if moving < 0:
        raise ValueError(f"robot {robot_id} is not an explorer in this state")
    origin = positions[moving]
    known = [ob for k, ob in enumerate(env.spec.obstacles) if env.revealed[k]]
    ux, uy = direction
    for s in range(params.distance_samples, 0, -1):
        d = cap * s / params.distance_samples
        landing = (origin[0] + d * ux, origin[1] + d * uy)
        if not point_in_explored(env, landing):
            continue
        if known and segment_intersects_obstacle(origin, landing, known):
            continue
        positions[moving] = landing
        ok = comm_connected(positions, params.comm_range, anchor)
        positions[moving] = origin
        if ok:
            return d
    return None


def plan_hop_for_robot(
    robot_id: int,
    state,
    params: PlannerParams,
    rng: np.random.Generator,
) -> HopDecision | None:
    """Plan one hop for one robot; None when no frontier draw works out.

    Up to max_point_attempts frontier cells are drawn uniformly at
    random; each is screened for a safe direction and then for a
    feasible hop length.
    """
    frontier = free_boundary(state.env, params.frontier_adjacency)
    if frontier.shape[0] == 0:
        return None
    pos = state.robot_position(robot_id)
    for _ in range(params.max_point_attempts):
        pick = frontier[int(rng.integers(frontier.shape[0]))]
        point = (float(pick[0]), float(pick[1]))
        if math.hypot(point[0] - pos[0], point[1] - pos[1]) < 1e-12:
            continue
        if not direction_is_safe(pos, point, state.env):
            continue
        direction = hop_direction(point, pos)
        to_point = math.hypot(point[0] - pos[0], point[1] - pos[1])
        d = compute_hop_distance(robot_id, direction, state, params, to_point)
        if d is None:
            continue
        target = (pos[0] + d * direction[0], pos[1] + d * direction[1])
        return HopDecision(robot_id, direction, d, target)
    return None


def plan_next_hop(
    state, params: PlannerParams, rng: np.random.Generator
) -> HopDecision | None:
    """Plan a hop for a robot drawn at random, re-drawing on failure.

    Robots that fail to produce a hop are excluded from later draws
    within this call; gives up after max_robot_attempts robots (or when
    none remain).
    """
    candidates = [r.robot_id for r in state.explorer_robots()]
    attempts = min(params.max_robot_attempts, len(candidates))
    for _ in range(attempts):
        idx = int(rng.integers(len(candidates)))
        rid = candidates.pop(idx)
        decision = plan_hop_for_robot(rid, state, params, rng)
        if decision is not None:
            return decision
    return None
