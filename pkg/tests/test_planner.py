"""Hop planning: target draws, safety screens, connectivity constraints."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from cavehop.localization import Pose
from cavehop.planner import (
    ConnectivityMode,
    PlannerParams,
    comm_connected,
    compute_hop_distance,
    direction_is_safe,
    hop_direction,
    plan_hop_for_robot,
    plan_next_hop,
)
from cavehop.world import EnvironmentSpec, Obstacle, build_environment, mark_explored


class StubState:
    """Just enough state surface for the planner: env plus robot poses."""

    def __init__(self, env, base, explorers):
        self.env = env
        self._base = base
        self._explorers = dict(explorers)

    def explorer_robots(self):
        return [
            SimpleNamespace(robot_id=rid, pose=Pose(x, y, 0.0))
            for rid, (x, y) in sorted(self._explorers.items())
        ]

    def base_position(self):
        return self._base

    def robot_position(self, rid):
        return self._explorers[rid]


def open_env(obstacles=(), resolution=10, explored_radius=None):
    env = build_environment(
        EnvironmentSpec(20.0, 20.0, resolution=resolution, obstacles=obstacles)
    )
    if explored_radius is not None:
        mark_explored(env, (10.0, 10.0), explored_radius)
    return env


DEFAULTS = PlannerParams()


class TestDirection:
    def test_unit_vector_toward_point(self):
        ux, uy = hop_direction((3.0, 4.0), (0.0, 0.0))
        assert (ux, uy) == pytest.approx((0.6, 0.8))
        assert math.hypot(ux, uy) == pytest.approx(1.0, abs=1e-12)

    def test_coincident_point_rejected(self):
        with pytest.raises(ValueError):
            hop_direction((1.0, 1.0), (1.0, 1.0))

    def test_safe_when_no_obstacle_revealed(self):
        ob = Obstacle(10.0, 10.0, 2.0)
        env = open_env(obstacles=(ob,))
        # Obstacle unrevealed: the swarm cannot see it, so the ray passes.
        assert direction_is_safe((2.0, 10.0), (18.0, 10.0), env)
        env.reveal_obstacle(0)
        assert not direction_is_safe((2.0, 10.0), (18.0, 10.0), env)
        assert direction_is_safe((2.0, 2.0), (18.0, 2.0), env)


class TestConnectivity:
    def test_pair_within_range(self):
        assert comm_connected([(0.0, 0.0), (4.0, 0.0)], 5.0)
        assert not comm_connected([(0.0, 0.0), (6.0, 0.0)], 5.0)

    def test_relay_chain_counts(self):
        chain = [(0.0, 0.0), (4.0, 0.0), (8.0, 0.0), (12.0, 0.0)]
        assert comm_connected(chain, 5.0)
        broken = [(0.0, 0.0), (4.0, 0.0), (12.0, 0.0)]
        assert not comm_connected(broken, 5.0)

    def test_anchor_choice_irrelevant_for_connected(self):
        pts = [(0.0, 0.0), (3.0, 0.0), (3.0, 3.0)]
        assert all(comm_connected(pts, 5.0, anchor=i) for i in range(3))

    def test_empty_and_single(self):
        assert comm_connected([], 5.0)
        assert comm_connected([(1.0, 1.0)], 5.0, anchor=0)

    def test_bad_anchor(self):
        with pytest.raises(ValueError):
            comm_connected([(0.0, 0.0)], 5.0, anchor=2)


class TestHopDistance:
    def test_takes_longest_feasible(self):
        env = open_env(explored_radius=8.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(hop_range=7.0, comm_range=50.0, distance_samples=50)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        # Explored to radius 8 around the robot: the full hop range fits.
        assert d == pytest.approx(7.0, abs=1e-9)

    def test_capped_by_max_distance(self):
        env = open_env(explored_radius=8.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=50.0)
        d = compute_hop_distance(1, (1.0, 0.0), state, params, max_distance=3.0)
        assert d == pytest.approx(3.0, abs=1e-9)

    def test_unexplored_landing_shortens_hop(self):
        env = open_env(explored_radius=4.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=50.0, distance_samples=200)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        assert d is not None
        # Landing must stay inside the explored disk of radius 4.
        assert d <= 4.0 + 0.1

    def test_revealed_obstacle_blocks_overflight(self):
        ob = Obstacle(13.0, 10.0, 1.0)
        env = open_env(obstacles=(ob,), explored_radius=8.0)
        env.reveal_obstacle(0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=50.0)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        # The disk spans x in [12, 14]: any landing at d >= 2 grazes it.
        assert d is not None and d < 2.0 + 1e-9

    def test_tethered_connectivity_limits_range(self):
        env = open_env(explored_radius=9.5)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=5.0, hop_range=7.0,
                               mode=ConnectivityMode.TETHERED, distance_samples=100)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        assert d is not None
        assert d <= 5.0 + 1e-9  # beyond comm range the base link breaks

    def test_detached_ignores_base(self):
        env = open_env(explored_radius=9.5)
        # Base far away; two explorers moving together.
        state = StubState(env, (0.0, 0.0), {1: (10.0, 10.0), 2: (9.0, 10.0)})
        params = PlannerParams(comm_range=5.0, hop_range=4.0,
                               mode=ConnectivityMode.DETACHED)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        assert d is not None
        assert d <= 4.0 + 1e-9

    def test_detached_keeps_swarm_together(self):
        env = open_env(explored_radius=9.5)
        state = StubState(env, (0.0, 0.0), {1: (10.0, 10.0), 2: (6.0, 10.0)})
        params = PlannerParams(comm_range=5.0, hop_range=7.0,
                               mode=ConnectivityMode.DETACHED, distance_samples=100)
        d = compute_hop_distance(1, (1.0, 0.0), state, params)
        # Robot 1 may not drift beyond 5 units of robot 2 at (6, 10).
        assert d is not None
        assert 10.0 + d - 6.0 <= 5.0 + 1e-9

    def test_unknown_robot_rejected(self):
        env = open_env(explored_radius=5.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        with pytest.raises(ValueError):
            compute_hop_distance(9, (1.0, 0.0), state, DEFAULTS)


class TestPlanHop:
    def test_returns_feasible_decision(self):
        env = open_env(explored_radius=6.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=50.0)
        rng = np.random.default_rng(0)
        decision = plan_hop_for_robot(1, state, params, rng)
        assert decision is not None
        assert decision.robot_id == 1
        assert math.hypot(*decision.direction) == pytest.approx(1.0, abs=1e-9)
        tx = 10.0 + decision.distance * decision.direction[0]
        ty = 10.0 + decision.distance * decision.direction[1]
        assert decision.target == pytest.approx((tx, ty))
        assert decision.distance <= params.hop_range + 1e-9

    def test_no_frontier_returns_none(self):
        env = open_env()  # nothing explored, no frontier
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        assert plan_hop_for_robot(1, state, DEFAULTS, np.random.default_rng(1)) is None

    def test_deterministic_for_seed(self):
        env = open_env(explored_radius=6.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0)})
        params = PlannerParams(comm_range=50.0)
        d1 = plan_hop_for_robot(1, state, params, np.random.default_rng(42))
        d2 = plan_hop_for_robot(1, state, params, np.random.default_rng(42))
        assert d1 == d2

    def test_plan_next_hop_draws_some_robot(self):
        env = open_env(explored_radius=6.0)
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0), 2: (11.0, 10.0)})
        params = PlannerParams(comm_range=50.0)
        seen = set()
        for seed in range(12):
            decision = plan_next_hop(state, params, np.random.default_rng(seed))
            assert decision is not None
            seen.add(decision.robot_id)
        assert seen == {1, 2}

    def test_plan_next_hop_gives_up_gracefully(self):
        env = open_env()
        state = StubState(env, (10.0, 10.0), {1: (10.0, 10.0), 2: (11.0, 10.0)})
        assert plan_next_hop(state, DEFAULTS, np.random.default_rng(5)) is None


class TestParamValidation:
    def test_invariants(self):
        with pytest.raises(ValueError):
            PlannerParams(vision_radius=0.0)
        with pytest.raises(ValueError):
            PlannerParams(distance_samples=0)
        with pytest.raises(ValueError):
            PlannerParams(frontier_adjacency=5)
