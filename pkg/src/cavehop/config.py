"""Run configuration: a strict YAML dialect with line-precise diagnostics.

A config document is a mapping of up to five sections (world, planner,
comms, flight, run); every key is optional and falls back to defaults
that reproduce the reference tube scenario.  Unknown keys are rejected,
and every parse or validation error carries the 1-based source line it
was found on.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import yaml

from .ballistics import G0_STANDARD, MOON_GRAVITY, FuelBudget
from .comms import CommParams
from .planner import ConnectivityMode, PlannerParams
from .world import EnvironmentSpec, Obstacle

Point = tuple[float, float]


class ConfigError(ValueError):
    """Any problem with a config document; .line is 1-based or None."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigSyntaxError(ConfigError):
    """The document is not valid YAML (or uses unsupported node kinds)."""


class ConfigKeyError(ConfigError):
    """The document contains a key the schema does not define."""


class ConfigValueError(ConfigError):
    """A value has the wrong type or violates a parameter invariant."""


@dataclass(frozen=True)
class FlightConfig:
    """Gravity, propulsion stack, and the world-unit to meter scale."""

    gravity: float = MOON_GRAVITY
    g0: float = G0_STANDARD
    isp_s: float = 350.0
    initial_mass_kg: float = 3.0
    propellant_mass_kg: float = 1.0
    meters_per_unit: float = 1.0
    enforce_budget: bool = False

    def __post_init__(self):
        if self.gravity <= 0.0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        if self.meters_per_unit <= 0.0:
            raise ValueError("meters_per_unit must be positive")
        self.fuel_budget()  # validates isp and masses

    def fuel_budget(self) -> FuelBudget:
        return FuelBudget(
            isp_s=self.isp_s,
            initial_mass_kg=self.initial_mass_kg,
            propellant_mass_kg=self.propellant_mass_kg,
            g0=self.g0,
        )


@dataclass(frozen=True)
class RunParams:
    """Swarm size, schedule, seeding, and output selection for one run."""

    robots: int = 15
    timesteps: int = 20
    seed: int = 0
    base_position: Point = (0.0, 4.0)
    start_positions: Optional[tuple[Point, ...]] = None
    frames: tuple[int, ...] = (0, 2, 5, 10, 15, 20)
    robot_selection: str = "sweep"
    coverage_threshold: Optional[float] = None
    return_to_base: Optional[bool] = None
    localization_noise_std: float = 0.0
    track_localization: bool = True

    def __post_init__(self):
        if self.robots < 1:
            raise ValueError(f"need at least one robot, got {self.robots}")
        if self.timesteps < 0:
            raise ValueError("timesteps must be >= 0")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit an unsigned 64-bit integer")
        if self.robot_selection not in ("sweep", "random"):
            raise ValueError(
                f"robot_selection must be 'sweep' or 'random', got {self.robot_selection!r}"
            )
        for f in self.frames:
            if f < 0:
                raise ValueError("frame timesteps must be >= 0")
        if self.coverage_threshold is not None and not (
            0.0 < self.coverage_threshold <= 1.0
        ):
            raise ValueError("coverage_threshold must lie in (0, 1]")
        if self.localization_noise_std < 0.0:
            raise ValueError("localization_noise_std must be >= 0")
        if self.start_positions is not None and len(self.start_positions) != self.robots:
            raise ValueError(
                f"start_positions lists {len(self.start_positions)} robots, "
                f"config asks for {self.robots}"
            )


@dataclass(frozen=True)
class Config:
    """Everything a simulation run needs, fully validated."""

    world: EnvironmentSpec
    planner: PlannerParams
    comms: CommParams
    flight: FlightConfig
    run: RunParams


# Boulder layout of the reference 50 x 8 tube; in-bounds and mutually
# disjoint so the corridor stays traversable on both sides.
DEFAULT_OBSTACLES: tuple[Obstacle, ...] = (
    Obstacle(8.0, 2.5, 0.8),
    Obstacle(14.0, 5.5, 1.2),
    Obstacle(21.0, 2.0, 0.6),
    Obstacle(27.0, 5.0, 1.5),
    Obstacle(34.0, 2.5, 1.0),
    Obstacle(42.0, 5.5, 0.9),
)


def default_config() -> Config:
    """The reference scenario: 15 tethered explorers in a 50 x 8 tube."""
    return Config(
        world=EnvironmentSpec(obstacles=DEFAULT_OBSTACLES),
        planner=PlannerParams(),
        comms=CommParams(),
        flight=FlightConfig(),
        run=RunParams(),
    )


# ---------------------------------------------------------------------------
# YAML loading with source lines attached to every value.


@dataclass
class _Val:
    value: object  # scalar, dict[str, _Val], or list[_Val]
    line: int


def _walk(node) -> _Val:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out: dict[str, _Val] = {}
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                raise ConfigSyntaxError(
                    "mapping keys must be plain scalars", key_node.start_mark.line + 1
                )
            key = str(key_node.value)
            if key in out:
                raise ConfigKeyError(
                    f"duplicate key {key!r}", key_node.start_mark.line + 1
                )
            out[key] = _walk(value_node)
        return _Val(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Val([_walk(child) for child in node.value], line)
    if isinstance(node, yaml.ScalarNode):
        constructor = yaml.constructor.SafeConstructor()
        try:
            value = constructor.construct_object(node, deep=True)
        except yaml.YAMLError as exc:
            raise ConfigSyntaxError(str(exc), line)
        return _Val(value, line)
    raise ConfigSyntaxError("unsupported yaml construct", line)


def _as_float(v: _Val, field: str) -> float:
    if isinstance(v.value, bool) or not isinstance(v.value, (int, float)):
        raise ConfigValueError(f"{field} must be a number, got {v.value!r}", v.line)
    return float(v.value)


def _as_int(v: _Val, field: str) -> int:
    if isinstance(v.value, bool) or not isinstance(v.value, int):
        raise ConfigValueError(f"{field} must be an integer, got {v.value!r}", v.line)
    return v.value


def _as_bool(v: _Val, field: str) -> bool:
    if not isinstance(v.value, bool):
        raise ConfigValueError(f"{field} must be a boolean, got {v.value!r}", v.line)
    return v.value


def _as_str(v: _Val, field: str) -> str:
    if not isinstance(v.value, str):
        raise ConfigValueError(f"{field} must be a string, got {v.value!r}", v.line)
    return v.value


def _as_point(v: _Val, field: str) -> Point:
    if not isinstance(v.value, list) or len(v.value) != 2:
        raise ConfigValueError(f"{field} must be a [x, y] pair", v.line)
    return (_as_float(v.value[0], field), _as_float(v.value[1], field))


class _Section:
    """One mapping section of the document, consumed key by key."""

    def __init__(self, name: str, val: Optional[_Val]):
        self.name = name
        if val is None or val.value is None:
            self.data: dict[str, _Val] = {}
            self.line: Optional[int] = None
        else:
            if not isinstance(val.value, dict):
                raise ConfigValueError(f"section {name!r} must be a mapping", val.line)
            self.data = dict(val.value)
            self.line = val.line

    def take(self, key: str) -> Optional[_Val]:
        # An explicit null is the same as leaving the key out.
        v = self.data.pop(key, None)
        return None if v is None or v.value is None else v

    def take_float(self, key: str, default: float) -> float:
        v = self.take(key)
        return default if v is None else _as_float(v, f"{self.name}.{key}")

    def take_int(self, key: str, default: int) -> int:
        v = self.take(key)
        return default if v is None else _as_int(v, f"{self.name}.{key}")

    def take_bool(self, key: str, default: bool) -> bool:
        v = self.take(key)
        return default if v is None else _as_bool(v, f"{self.name}.{key}")

    def finish(self) -> None:
        for key, v in self.data.items():
            raise ConfigKeyError(f"unknown key {self.name!r}.{key!r}", v.line)

    def build(self, factory, **kwargs):
        """Run a validated dataclass constructor, mapping failures to this section."""
        try:
            return factory(**kwargs)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigValueError(str(exc), self.line)


def _build_world(sec: _Section) -> EnvironmentSpec:
    length = sec.take_float("length", 50.0)
    width = sec.take_float("width", 8.0)
    resolution = sec.take_int("resolution", 100)
    obstacles_val = sec.take("obstacles")
    if obstacles_val is None:
        obstacles = DEFAULT_OBSTACLES
    else:
        if not isinstance(obstacles_val.value, list):
            raise ConfigValueError("world.obstacles must be a list", obstacles_val.line)
        obstacles = []
        for item in obstacles_val.value:
            ob = _Section("world.obstacles[]", item)
            x = ob.take("x")
            y = ob.take("y")
            r = ob.take("radius")
            if x is None or y is None or r is None:
                raise ConfigValueError(
                    "each obstacle needs x, y, and radius", item.line
                )
            parsed = ob.build(
                Obstacle,
                x=_as_float(x, "obstacle.x"),
                y=_as_float(y, "obstacle.y"),
                radius=_as_float(r, "obstacle.radius"),
            )
            ob.finish()
            obstacles.append(parsed)
        obstacles = tuple(obstacles)
    spec = sec.build(
        EnvironmentSpec,
        length=length,
        width=width,
        resolution=resolution,
        obstacles=obstacles,
    )
    sec.finish()
    return spec


def _build_planner(sec: _Section) -> PlannerParams:
    mode_val = sec.take("mode")
    if mode_val is None:
        mode = ConnectivityMode.TETHERED
    else:
        name = _as_str(mode_val, "planner.mode")
        try:
            mode = ConnectivityMode(name)
        except ValueError:
            raise ConfigValueError(
                f"planner.mode must be 'tethered' or 'detached', got {name!r}",
                mode_val.line,
            )
    params = sec.build(
        PlannerParams,
        vision_radius=sec.take_float("vision_radius", 2.0),
        comm_range=sec.take_float("comm_range", 5.0),
        hop_range=sec.take_float("hop_range", 7.0),
        mode=mode,
        max_point_attempts=sec.take_int("max_point_attempts", 10),
        max_robot_attempts=sec.take_int("max_robot_attempts", 5),
        distance_samples=sec.take_int("distance_samples", 50),
        frontier_adjacency=sec.take_int("frontier_adjacency", 4),
    )
    sec.finish()
    return params


def _build_comms(sec: _Section) -> CommParams:
    params = sec.build(
        CommParams,
        tx_power_dbm=sec.take_float("tx_power_dbm", 25.0),
        antenna_gain_db=sec.take_float("antenna_gain_db", 1.0),
        rx_sensitivity_dbm=sec.take_float("rx_sensitivity_dbm", -80.0),
        frequency_hz=sec.take_float("frequency_hz", 2.4e9),
        fixed_losses_db=sec.take_float("fixed_losses_db", 12.0),
        bandwidth_hz=sec.take_float("bandwidth_hz", 20e3),
        noise_temperature_k=sec.take_float("noise_temperature_k", 200.0),
        pointing_loss_db=sec.take_float("pointing_loss_db", 18.0),
        min_ebn0_db=sec.take_float("min_ebn0_db", 10.0),
        packet_size_bits=sec.take_int("packet_size_bits", 1024),
        data_size_bits=sec.take_int("data_size_bits", 8_000_000),
    )
    sec.finish()
    return params


def _build_flight(sec: _Section) -> FlightConfig:
    params = sec.build(
        FlightConfig,
        gravity=sec.take_float("gravity", MOON_GRAVITY),
        g0=sec.take_float("g0", G0_STANDARD),
        isp_s=sec.take_float("isp_s", 350.0),
        initial_mass_kg=sec.take_float("initial_mass_kg", 3.0),
        propellant_mass_kg=sec.take_float("propellant_mass_kg", 1.0),
        meters_per_unit=sec.take_float("meters_per_unit", 1.0),
        enforce_budget=sec.take_bool("enforce_budget", False),
    )
    sec.finish()
    return params


def _build_run(sec: _Section) -> RunParams:
    base_val = sec.take("base_position")
    base = (0.0, 4.0) if base_val is None else _as_point(base_val, "run.base_position")

    starts_val = sec.take("start_positions")
    if starts_val is None:
        starts = None
    else:
        if not isinstance(starts_val.value, list):
            raise ConfigValueError(
                "run.start_positions must be a list of [x, y] pairs", starts_val.line
            )
        starts = tuple(
            _as_point(item, "run.start_positions[]") for item in starts_val.value
        )

    frames_val = sec.take("frames")
    if frames_val is None:
        frames = (0, 2, 5, 10, 15, 20)
    else:
        if not isinstance(frames_val.value, list):
            raise ConfigValueError("run.frames must be a list of integers", frames_val.line)
        frames = tuple(_as_int(item, "run.frames[]") for item in frames_val.value)

    selection_val = sec.take("robot_selection")
    selection = (
        "sweep" if selection_val is None else _as_str(selection_val, "run.robot_selection")
    )

    threshold_val = sec.take("coverage_threshold")
    threshold = (
        None if threshold_val is None else _as_float(threshold_val, "run.coverage_threshold")
    )

    return_val = sec.take("return_to_base")
    return_to_base = (
        None if return_val is None else _as_bool(return_val, "run.return_to_base")
    )

    params = sec.build(
        RunParams,
        robots=sec.take_int("robots", 15),
        timesteps=sec.take_int("timesteps", 20),
        seed=sec.take_int("seed", 0),
        base_position=base,
        start_positions=starts,
        frames=frames,
        robot_selection=selection,
        coverage_threshold=threshold,
        return_to_base=return_to_base,
        localization_noise_std=sec.take_float("localization_noise_std", 0.0),
        track_localization=sec.take_bool("track_localization", True),
    )
    sec.finish()
    return params


def _cross_validate(config: Config, lines: dict[str, Optional[int]]) -> None:
    """Checks spanning sections: geometry of base and start placements."""
    spec = config.world
    bx, by = config.run.base_position

    def inside(p: Point) -> bool:
        return 0.0 <= p[0] <= spec.length and 0.0 <= p[1] <= spec.width

    def in_obstacle(p: Point) -> bool:
        return any(
            (p[0] - ob.x) ** 2 + (p[1] - ob.y) ** 2 <= ob.radius**2
            for ob in spec.obstacles
        )

    if not inside((bx, by)):
        raise ConfigValueError(
            f"base position ({bx}, {by}) lies outside the tube", lines.get("run")
        )
    if in_obstacle((bx, by)):
        raise ConfigValueError(
            f"base position ({bx}, {by}) lies inside an obstacle", lines.get("run")
        )
    if config.run.start_positions is not None:
        for i, p in enumerate(config.run.start_positions):
            if not inside(p):
                raise ConfigValueError(
                    f"start position {i} {p} lies outside the tube", lines.get("run")
                )
            if in_obstacle(p):
                raise ConfigValueError(
                    f"start position {i} {p} lies inside an obstacle", lines.get("run")
                )


def parse_config(text: str) -> Config:
    """Parse a YAML document into a validated Config.

    An empty document yields the all-defaults reference scenario.
    Raises ConfigSyntaxError, ConfigKeyError, or ConfigValueError with
    the offending source line.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = None if mark is None else mark.line + 1
        raise ConfigSyntaxError(f"invalid yaml: {exc}", line)
    if node is None:
        return default_config()

    root = _walk(node)
    if not isinstance(root.value, dict):
        raise ConfigValueError("top level must be a mapping of sections", root.line)
    data = dict(root.value)

    sections = {}
    lines: dict[str, Optional[int]] = {}
    for name in ("world", "planner", "comms", "flight", "run"):
        val = data.pop(name, None)
        sections[name] = _Section(name, val)
        lines[name] = None if val is None else val.line
    for key, v in data.items():
        raise ConfigKeyError(f"unknown section {key!r}", v.line)

    config = Config(
        world=_build_world(sections["world"]),
        planner=_build_planner(sections["planner"]),
        comms=_build_comms(sections["comms"]),
        flight=_build_flight(sections["flight"]),
        run=_build_run(sections["run"]),
    )
    _cross_validate(config, lines)
    return config


def load_config(path: str | Path) -> Config:
    """Read and parse a config file; errors carry lines in that file."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


def render_config(config: Config) -> str:
    """Serialize a Config to canonical YAML; parse_config inverts this."""
    doc: dict = {
        "world": {
            "length": config.world.length,
            "width": config.world.width,
            "resolution": config.world.resolution,
            "obstacles": [
                {"x": ob.x, "y": ob.y, "radius": ob.radius}
                for ob in config.world.obstacles
            ],
        },
        "planner": {
            "vision_radius": config.planner.vision_radius,
            "comm_range": config.planner.comm_range,
            "hop_range": config.planner.hop_range,
            "mode": config.planner.mode.value,
            "max_point_attempts": config.planner.max_point_attempts,
            "max_robot_attempts": config.planner.max_robot_attempts,
            "distance_samples": config.planner.distance_samples,
            "frontier_adjacency": config.planner.frontier_adjacency,
        },
        "comms": {
            "tx_power_dbm": config.comms.tx_power_dbm,
            "antenna_gain_db": config.comms.antenna_gain_db,
            "rx_sensitivity_dbm": config.comms.rx_sensitivity_dbm,
            "frequency_hz": config.comms.frequency_hz,
            "fixed_losses_db": config.comms.fixed_losses_db,
            "bandwidth_hz": config.comms.bandwidth_hz,
            "noise_temperature_k": config.comms.noise_temperature_k,
            "pointing_loss_db": config.comms.pointing_loss_db,
            "min_ebn0_db": config.comms.min_ebn0_db,
            "packet_size_bits": config.comms.packet_size_bits,
            "data_size_bits": config.comms.data_size_bits,
        },
        "flight": {
            "gravity": config.flight.gravity,
            "g0": config.flight.g0,
            "isp_s": config.flight.isp_s,
            "initial_mass_kg": config.flight.initial_mass_kg,
            "propellant_mass_kg": config.flight.propellant_mass_kg,
            "meters_per_unit": config.flight.meters_per_unit,
            "enforce_budget": config.flight.enforce_budget,
        },
        "run": {
            "robots": config.run.robots,
            "timesteps": config.run.timesteps,
            "seed": config.run.seed,
            "base_position": list(config.run.base_position),
            "frames": list(config.run.frames),
            "robot_selection": config.run.robot_selection,
            "localization_noise_std": config.run.localization_noise_std,
            "track_localization": config.run.track_localization,
        },
    }
    run = doc["run"]
    if config.run.start_positions is not None:
        run["start_positions"] = [list(p) for p in config.run.start_positions]
    if config.run.coverage_threshold is not None:
        run["coverage_threshold"] = config.run.coverage_threshold
    if config.run.return_to_base is not None:
        run["return_to_base"] = config.run.return_to_base
    return yaml.safe_dump(doc, sort_keys=False)
