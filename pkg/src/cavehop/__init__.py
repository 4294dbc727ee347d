"""Deterministic multi-robot exploration of lava tubes with hopping rovers."""

from .ballistics import (
    FuelBudget,
    HopPlan,
    delta_v_budget,
    hop_budget,
    hop_cost,
    hop_velocity,
    optimal_transfer_time,
    plan_hop,
)
from .comms import (
    CommParams,
    DisconnectedError,
    LinkBudgetError,
    build_comm_graph,
    chain_times_s,
    free_space_path_loss_db,
    max_range_m,
    received_power_dbm,
    shannon_rate_bps,
    shortest_path,
    transmission_time_s,
)
from .config import (
    Config,
    ConfigError,
    ConfigKeyError,
    ConfigSyntaxError,
    ConfigValueError,
    default_config,
    load_config,
    parse_config,
    render_config,
)
from .engine import (
    CoverageStats,
    SimState,
    TrialResult,
    init_simulation,
    monte_carlo,
    run,
    step,
)
from .localization import (
    Pose,
    RelativeMeasurement,
    compose_pose,
    localize_chain,
    normalize_angle,
    relative_measurement,
)
from .planner import (
    ConnectivityMode,
    HopDecision,
    PlannerParams,
    comm_connected,
    compute_hop_distance,
    plan_hop_for_robot,
    plan_next_hop,
)
from .world import (
    CellState,
    Environment,
    EnvironmentSpec,
    Obstacle,
    build_environment,
    coverage_fraction,
    free_boundary,
    mark_explored,
    point_in_explored,
    segment_intersects_obstacle,
)

__version__ = "0.1.0"
