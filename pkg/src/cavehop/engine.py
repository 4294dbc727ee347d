"""Simulation engine: owns the state, schedules hops, records results.

Each timestep every explorer gets one chance to hop (in id order, or by
random draw when configured).  A detached swarm runs a return phase when
its exploration budget ends: hops are undone strictly in reverse
chronological order, one per timestep, so the swarm retraces exactly the
configurations it already proved connected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .ballistics import delta_v_budget, hop_cost
from .config import Config, RunParams
from .localization import Pose, compose_pose, relative_measurement
from .planner import (
    ConnectivityMode,
    HopDecision,
    comm_connected,
    plan_hop_for_robot,
    plan_next_hop,
)
from .world import (
    Environment,
    build_environment,
    coverage_fraction,
    frontier_cell_count,
    mark_explored,
    point_to_segment_distance,
)

Point = tuple[float, float]


class Role(Enum):
    BASE = "base"
    EXPLORER = "explorer"


@dataclass
class HopRecord:
    """One executed hop, kept for budget accounting and return retracing."""

    timestep: int
    robot_id: int
    origin: Point
    target: Point
    distance: float  # world units
    delta_v: float  # m/s


@dataclass
class RobotState:
    robot_id: int
    role: Role
    pose: Pose
    delta_v_used: float = 0.0
    forward_hops: int = 0
    hop_log: list[HopRecord] = field(default_factory=list)


class SimState:
    """Mutable world-plus-swarm state threaded through the engine."""

    def __init__(
        self,
        env: Environment,
        robots: list[RobotState],
        rng: np.random.Generator,
        noise_rng: np.random.Generator,
        seed: int,
    ):
        self.env = env
        self.robots = robots
        self.rng = rng
        self.noise_rng = noise_rng
        self.seed = seed
        self.timestep = 0
        self.stall_count = 0
        self.hop_count = 0
        self.total_delta_v = 0.0
        self.last_newly_explored = 0
        self.hop_stack: list[HopRecord] = []
        self.returning = False
        self._by_id = {r.robot_id: r for r in robots}

    def robot_by_id(self, robot_id: int) -> RobotState:
        return self._by_id[robot_id]

    def explorer_robots(self) -> list[RobotState]:
        return [r for r in self.robots if r.role is Role.EXPLORER]

    def base_robot(self) -> RobotState:
        return next(r for r in self.robots if r.role is Role.BASE)

    def base_position(self) -> Point:
        return self.base_robot().pose.position

    def robot_position(self, robot_id: int) -> Point:
        return self._by_id[robot_id].pose.position


def _auto_positions(config: Config) -> list[Point]:
    """Deterministic start cluster: lattice points nearest the base.

    Points sit on a 0.7-unit square lattice, inside the tube, clear of
    obstacles, and within 90% of comm range of the base so the initial
    graph is connected with margin.  Sorted by distance then coordinates,
    so the same config always yields the same placement.
    """
    spec = config.world
    bx, by = config.run.base_position
    reach = 0.9 * config.planner.comm_range
    pitch = 0.7
    candidates: list[tuple[float, float, float]] = []
    nx = int(spec.length / pitch) + 1
    ny = int(spec.width / pitch) + 1
    for i in range(nx):
        x = pitch / 2.0 + i * pitch
        if x > spec.length:
            continue
        for j in range(ny):
            y = pitch / 2.0 + j * pitch
            if y > spec.width:
                continue
            d = math.hypot(x - bx, y - by)
            if d > reach or d < 1e-9:
                continue
            if any(
                (x - ob.x) ** 2 + (y - ob.y) ** 2 <= ob.radius**2
                for ob in spec.obstacles
            ):
                continue
            candidates.append((d, x, y))
    candidates.sort()
    n = config.run.robots
    if len(candidates) < n:
        raise ValueError(
            f"cannot place {n} robots near base ({bx}, {by}): "
            f"only {len(candidates)} clear spots in comm range"
        )
    return [(x, y) for _, x, y in candidates[:n]]


def init_simulation(config: Config, seed: Optional[int] = None) -> SimState:
    """Build the initial state: robots placed, first sensing sweep applied."""
    if seed is None:
        seed = config.run.seed
    env = build_environment(config.world)
    base = RobotState(0, Role.BASE, Pose(*config.run.base_position, 0.0))

    starts = config.run.start_positions
    positions = list(starts) if starts is not None else _auto_positions(config)
    robots = [base]
    for i, (x, y) in enumerate(positions):
        robots.append(RobotState(i + 1, Role.EXPLORER, Pose(x, y, 0.0)))

    explorer_pts = [r.pose.position for r in robots[1:]]
    all_pts = [base.pose.position] + explorer_pts
    if not comm_connected(all_pts, config.planner.comm_range, 0):
        raise ValueError("initial placement is not comm-connected to the base")

    seq = np.random.SeedSequence(seed)
    plan_seq, noise_seq = seq.spawn(2)
    state = SimState(
        env,
        robots,
        np.random.Generator(np.random.PCG64(plan_seq)),
        np.random.Generator(np.random.PCG64(noise_seq)),
        seed,
    )
    for r in robots:
        state.last_newly_explored += mark_explored(
            env, r.pose.position, config.planner.vision_radius
        )
    return state


HookFn = Callable[[SimState, HopDecision], None]


def _check_connectivity(state: SimState, config: Config) -> None:
    """Engine invariant: the planner must never have let the graph split."""
    pts = [r.pose.position for r in state.explorer_robots()]
    if config.planner.mode is ConnectivityMode.TETHERED:
        if not comm_connected([state.base_position()] + pts, config.planner.comm_range, 0):
            raise RuntimeError("connectivity invariant violated: base link lost")
    else:
        if not comm_connected(pts, config.planner.comm_range, 0):
            raise RuntimeError("connectivity invariant violated: swarm split")


def _execute_hop(
    state: SimState,
    config: Config,
    decision: HopDecision,
    before_hop: Optional[HookFn],
    after_hop: Optional[HookFn],
) -> bool:
    """Carry out a planned hop.  Returns False when the hop must be refused.

    Two refusals exist: the fuel budget (when enforced) cannot cover the
    hop, or the flight path crosses an obstacle the swarm had not yet
    revealed.  The latter aborts the hop but reveals the obstacle, so
    the planner avoids it from then on.
    """
    robot = state.robot_by_id(decision.robot_id)
    origin = robot.pose.position
    cost = hop_cost(
        decision.distance * config.flight.meters_per_unit, config.flight.gravity
    )
    if config.flight.enforce_budget:
        capacity = delta_v_budget(config.flight.fuel_budget())
        if robot.delta_v_used + cost > capacity:
            return False

    for k, ob in enumerate(state.env.spec.obstacles):
        if point_to_segment_distance(ob.center, origin, decision.target) <= ob.radius:
            # The planner screens revealed obstacles, so this one was unknown.
            state.env.reveal_obstacle(k)
            return False

    if before_hop is not None:
        before_hop(state, decision)
    heading = math.atan2(decision.direction[1], decision.direction[0])
    robot.pose = Pose(decision.target[0], decision.target[1], heading)
    robot.delta_v_used += cost
    robot.forward_hops += 1
    record = HopRecord(
        state.timestep, decision.robot_id, origin, decision.target, decision.distance, cost
    )
    robot.hop_log.append(record)
    state.hop_stack.append(record)
    state.hop_count += 1
    state.total_delta_v += cost
    state.last_newly_explored += mark_explored(
        state.env, decision.target, config.planner.vision_radius
    )
    _check_connectivity(state, config)
    if after_hop is not None:
        after_hop(state, decision)
    return True


def step(
    state: SimState,
    config: Config,
    before_hop: Optional[HookFn] = None,
    after_hop: Optional[HookFn] = None,
) -> SimState:
    """Advance one exploration timestep: each explorer gets one hop attempt.

    With selection 'sweep' robots plan in id order; with 'random' each
    attempt draws a robot at random.  Robots without a feasible hop are
    counted as stalls, except when the frontier is empty (exploration
    finished), in which case the step only advances time.
    """
    state.timestep += 1
    state.last_newly_explored = 0
    if frontier_cell_count(state.env, config.planner.frontier_adjacency) == 0:
        return state

    explorers = state.explorer_robots()
    if config.run.robot_selection == "sweep":
        for robot in explorers:
            decision = plan_hop_for_robot(
                robot.robot_id, state, config.planner, state.rng
            )
            if decision is None or not _execute_hop(
                state, config, decision, before_hop, after_hop
            ):
                state.stall_count += 1
    else:
        for _ in range(len(explorers)):
            decision = plan_next_hop(state, config.planner, state.rng)
            if decision is None or not _execute_hop(
                state, config, decision, before_hop, after_hop
            ):
                state.stall_count += 1
    return state


def return_step(state: SimState, config: Config) -> SimState:
    """Undo the most recent outstanding hop (one per timestep).

    The reverse hop costs the same delta-v as the forward one.  Because
    undo order is globally reverse-chronological, the swarm passes only
    through configurations it already visited, so connectivity needs no
    replanning.
    """
    if not state.hop_stack:
        raise RuntimeError("return_step called with no hops outstanding")
    state.timestep += 1
    state.last_newly_explored = 0
    record = state.hop_stack.pop()
    robot = state.robot_by_id(record.robot_id)
    back = (
        record.origin[0] - record.target[0],
        record.origin[1] - record.target[1],
    )
    robot.pose = Pose(record.origin[0], record.origin[1], math.atan2(back[1], back[0]))
    robot.delta_v_used += record.delta_v
    robot.hop_log.pop()
    state.hop_count += 1
    state.total_delta_v += record.delta_v
    return state


def localized_poses(
    state: SimState, config: Config
) -> list[Optional[tuple[float, float, float]]]:
    """Chained relative-measurement estimate per explorer, None if unreachable.

    A relay tree is grown from the base over the comm graph (breadth
    first, id order, so the tree is deterministic); each explorer's pose
    estimate folds the measurements along its tree branch.
    """
    explorers = state.explorer_robots()
    nodes = [state.base_robot()] + explorers
    pts = [r.pose.position for r in nodes]
    r2 = config.planner.comm_range ** 2
    n = len(nodes)
    parent: dict[int, int] = {0: -1}
    order = [0]
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        ux, uy = pts[u]
        for v in range(n):
            if v in parent:
                continue
            if (pts[v][0] - ux) ** 2 + (pts[v][1] - uy) ** 2 <= r2:
                parent[v] = u
                order.append(v)

    noise = config.run.localization_noise_std
    rng = state.noise_rng if noise > 0.0 else None
    estimates: dict[int, Pose] = {0: nodes[0].pose}
    for v in order[1:]:
        meas = relative_measurement(
            nodes[parent[v]].pose, nodes[v].pose, noise, rng
        )
        estimates[v] = compose_pose(estimates[parent[v]], meas)

    out: list[Optional[tuple[float, float, float]]] = []
    for i in range(1, n):
        if i in estimates:
            p = estimates[i]
            out.append((p.x, p.y, p.heading))
        else:
            out.append(None)
    return out


def snapshot_row(state: SimState, config: Config, phase: str) -> dict:
    """JSON-ready record of the state at the end of a timestep."""
    explorers = state.explorer_robots()
    pts = [r.pose.position for r in explorers]
    base_pt = state.base_position()
    row: dict = {
        "timestep": state.timestep,
        "phase": phase,
        "coverage": coverage_fraction(state.env),
        "newly_explored": state.last_newly_explored,
        "stalls": state.stall_count,
        "connected_to_base": comm_connected(
            [base_pt] + pts, config.planner.comm_range, 0
        ),
        "internal_connected": comm_connected(pts, config.planner.comm_range, 0),
    }
    estimates = (
        localized_poses(state, config) if config.run.track_localization else None
    )
    robots = []
    for r in state.robots:
        entry = {
            "id": r.robot_id,
            "role": r.role.value,
            "x": r.pose.x,
            "y": r.pose.y,
            "heading": r.pose.heading,
            "delta_v_used": r.delta_v_used,
        }
        if estimates is not None and r.role is Role.EXPLORER:
            est = estimates[explorers.index(r)]
            entry["estimate"] = None if est is None else list(est)
        robots.append(entry)
    row["robots"] = robots
    return row


@dataclass
class TrialResult:
    """Everything one run produces, ready for CSV/JSON serialization."""

    seed: int
    coverage_series: list[tuple[int, float]]
    snapshots: list[dict]
    hop_count: int
    stall_count: int
    return_steps: int
    total_delta_v: float
    final_coverage: float
    robots: list[dict]

    def summary_dict(self) -> dict:
        return {
            "seed": self.seed,
            "timesteps": len(self.coverage_series) - 1,
            "final_coverage": self.final_coverage,
            "hop_count": self.hop_count,
            "stall_count": self.stall_count,
            "return_steps": self.return_steps,
            "total_delta_v": self.total_delta_v,
            "robots": self.robots,
        }


def run(
    config: Config,
    seed: Optional[int] = None,
    before_hop: Optional[HookFn] = None,
    after_hop: Optional[HookFn] = None,
) -> TrialResult:
    """Run one full trial: init, exploration budget, optional return phase.

    The coverage series always has timesteps + 1 entries.  A detached
    swarm (unless return_to_base overrides) retraces all hops afterwards;
    with a coverage_threshold it cuts exploration short as soon as the
    threshold is met and spends the remaining budget returning.
    """
    state = init_simulation(config, seed)
    mode = config.planner.mode
    do_return = config.run.return_to_base
    if do_return is None:
        do_return = mode is ConnectivityMode.DETACHED
    threshold = config.run.coverage_threshold

    coverage = [(0, coverage_fraction(state.env))]
    snapshots = [snapshot_row(state, config, "explore")]
    return_steps = 0

    for _ in range(config.run.timesteps):
        if (
            do_return
            and not state.returning
            and threshold is not None
            and coverage_fraction(state.env) >= threshold
        ):
            state.returning = True
        if state.returning and state.hop_stack:
            return_step(state, config)
            return_steps += 1
            phase = "return"
        elif state.returning:
            state.timestep += 1
            state.last_newly_explored = 0
            phase = "return"
        else:
            step(state, config, before_hop, after_hop)
            phase = "explore"
        coverage.append((state.timestep, coverage_fraction(state.env)))
        snapshots.append(snapshot_row(state, config, phase))

    if do_return:
        while state.hop_stack:
            return_step(state, config)
            return_steps += 1
            snapshots.append(snapshot_row(state, config, "return"))

    robots = [
        {
            "id": r.robot_id,
            "role": r.role.value,
            "x": r.pose.x,
            "y": r.pose.y,
            "heading": r.pose.heading,
            "delta_v_used": r.delta_v_used,
            "hops": r.forward_hops,
        }
        for r in state.robots
    ]
    return TrialResult(
        seed=state.seed,
        coverage_series=coverage,
        snapshots=snapshots,
        hop_count=state.hop_count,
        stall_count=state.stall_count,
        return_steps=return_steps,
        total_delta_v=state.total_delta_v,
        final_coverage=coverage_fraction(state.env),
        robots=robots,
    )


@dataclass
class CoverageStats:
    """Per-timestep coverage statistics across trials at one swarm size."""

    robot_count: int
    n_trials: int
    timesteps: list[int]
    mean: list[float]
    std: list[float]  # sample standard deviation (ddof 1)


def monte_carlo(
    config: Config,
    robot_counts: list[int],
    n_trials: int,
    base_seed: Optional[int] = None,
    seed_stride: int = 1,
) -> list[CoverageStats]:
    """Repeated trials per swarm size; trial i uses seed base + i * stride.

    Start positions are re-derived per swarm size (explicit
    start_positions would pin the robot count), and each trial is fully
    independent.
    """
    if n_trials < 2:
        raise ValueError("need at least 2 trials for a sample standard deviation")
    if base_seed is None:
        base_seed = config.run.seed
    out = []
    for count in robot_counts:
        run_params = replace_run(config.run, robots=count)
        cfg = Config(config.world, config.planner, config.comms, config.flight, run_params)
        series = []
        for trial in range(n_trials):
            result = run(cfg, seed=base_seed + trial * seed_stride)
            series.append([c for _, c in result.coverage_series])
        arr = np.array(series)
        out.append(
            CoverageStats(
                robot_count=count,
                n_trials=n_trials,
                timesteps=list(range(arr.shape[1])),
                mean=arr.mean(axis=0).tolist(),
                std=arr.std(axis=0, ddof=1).tolist(),
            )
        )
    return out


def replace_run(run_params: RunParams, **changes) -> RunParams:
    """RunParams copy with fields swapped; start positions drop on resize."""
    if (
        "robots" in changes
        and run_params.start_positions is not None
        and changes["robots"] != run_params.robots
    ):
        changes.setdefault("start_positions", None)
    return dataclasses.replace(run_params, **changes)
