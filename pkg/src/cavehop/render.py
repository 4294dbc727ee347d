"""Rendering: exploration frames and report figures as SVG files.

Frames are a pure function of the config and the snapshot log: the grid
is replayed by re-marking the sensing disk at every logged robot pose,
so a frame can be rendered long after the run, from the files alone.
SVG output is made reproducible by pinning the hash salt and dropping
the creation date, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle

from .config import Config
from .engine import CoverageStats
from .world import CellState, Environment, build_environment, mark_explored

# Shared palette: explored floor green, unexplored purple, obstacles
# yellow, the base red, explorers black.
COLOR_EXPLORED = "#5cb85c"
COLOR_UNEXPLORED = "#6a4a98"
COLOR_OBSTACLE = "#e8c832"
COLOR_BASE = "#d62728"
COLOR_ROBOT = "#111111"
COLOR_LINK = "#444444"

_SVG_SETTINGS = {"svg.hashsalt": "cavehop", "svg.fonttype": "none"}


def _save(fig, out_path: Path) -> None:
    with plt.rc_context(_SVG_SETTINGS):
        fig.savefig(out_path, format=out_path.suffix.lstrip(".") or "svg",
                    metadata={"Date": None})
    plt.close(fig)


def replay_environment(
    config: Config, snapshots: list[dict], upto_timestep: int,
    env: Environment | None = None, from_timestep: int = -1,
) -> Environment:
    """Grid state implied by all robot poses logged up to a timestep.

    Pass the env returned for an earlier timestep (with from_timestep set
    to it) to continue the replay incrementally instead of starting over.
    """
    if env is None:
        env = build_environment(config.world)
    vision = config.planner.vision_radius
    for row in snapshots:
        if from_timestep < row["timestep"] <= upto_timestep:
            for robot in row["robots"]:
                mark_explored(env, (robot["x"], robot["y"]), vision)
    return env


def _state_image(env: Environment) -> np.ndarray:
    """RGB image of the grid, transposed to matplotlib's row-major layout."""
    palette = {
        int(CellState.UNEXPLORED): (0x6A, 0x4A, 0x98),
        int(CellState.EXPLORED_FREE): (0x5C, 0xB8, 0x5C),
        int(CellState.OBSTACLE): (0xE8, 0xC8, 0x32),
    }
    img = np.zeros((env.ny, env.nx, 3), dtype=np.uint8)
    states = env.states.T  # (ny, nx)
    for value, rgb in palette.items():
        img[states == value] = rgb
    return img


def render_frame(
    config: Config, snapshots: list[dict], timestep: int, out_path: str | Path,
    env: Environment | None = None, from_timestep: int = -1,
) -> Path:
    """Draw one timestep: floor grid, obstacle outlines, comm links, robots.

    Raises ValueError when the snapshot log has no row for the timestep.
    """
    out_path = Path(out_path)
    row = next((r for r in snapshots if r["timestep"] == timestep), None)
    if row is None:
        raise ValueError(f"snapshot log has no timestep {timestep}")
    env = replay_environment(config, snapshots, timestep, env, from_timestep)

    spec = config.world
    fig, ax = plt.subplots(figsize=(10, 10 * spec.width / spec.length + 0.8))
    ax.imshow(
        _state_image(env),
        origin="lower",
        extent=(0.0, spec.length, 0.0, spec.width),
        interpolation="nearest",
    )
    for ob in spec.obstacles:
        ax.add_patch(
            Circle((ob.x, ob.y), ob.radius, fill=False, color="#8a7414", lw=1.0)
        )

    robots = row["robots"]
    pts = [(r["x"], r["y"]) for r in robots]
    r2 = config.planner.comm_range ** 2
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if (pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2 <= r2:
                ax.plot(
                    [pts[i][0], pts[j][0]],
                    [pts[i][1], pts[j][1]],
                    color=COLOR_LINK,
                    lw=0.7,
                    zorder=2,
                )
    for r in robots:
        if r["role"] == "base":
            ax.plot(r["x"], r["y"], "s", color=COLOR_BASE, ms=9, zorder=4)
        else:
            ax.plot(r["x"], r["y"], "o", color=COLOR_ROBOT, ms=5, zorder=3)

    ax.set_xlim(0, spec.length)
    ax.set_ylim(0, spec.width)
    ax.set_aspect("equal")
    ax.set_xlabel("x [units]")
    ax.set_ylabel("y [units]")
    ax.set_title(
        f"t = {timestep}   coverage = {row['coverage'] * 100.0:.1f}%"
    )
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def render_frames(
    config: Config, snapshots: list[dict], frames: list[int], out_dir: str | Path,
    prefix: str = "frame", fmt: str = "svg",
) -> list[Path]:
    """Render several timesteps, replaying the grid incrementally.

    Frames not present in the snapshot log are skipped.  Returns the
    paths written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    have = {row["timestep"] for row in snapshots}
    env = build_environment(config.world)
    last = -1
    written = []
    for t in sorted(set(frames)):
        if t not in have:
            continue
        env = replay_environment(config, snapshots, t, env, last)
        path = out_dir / f"{prefix}_t{t:03d}.{fmt}"
        render_frame(config, snapshots, t, path, env, t)
        last = t
        written.append(path)
    return written


def plot_hop_budget(rows: list[dict], out_path: str | Path) -> Path:
    """Bar chart of hop counts per body and hop distance.

    Rows need keys body, hop_distance_m, hops.
    """
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    bodies = sorted({r["body"] for r in rows})
    width = 0.8 / max(1, len(bodies))
    distances = sorted({r["hop_distance_m"] for r in rows})
    xticks = np.arange(len(distances))
    for bi, body in enumerate(bodies):
        by_dist = {r["hop_distance_m"]: r["hops"] for r in rows if r["body"] == body}
        ax.bar(
            xticks + bi * width,
            [by_dist.get(d, 0) for d in distances],
            width,
            label=body,
        )
    ax.set_xticks(xticks + width * (len(bodies) - 1) / 2)
    ax.set_xticklabels([f"{d:g}" for d in distances], rotation=45)
    ax.set_xlabel("hop distance [m]")
    ax.set_ylabel("hops in budget")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def plot_chain_times(rows: list[tuple[int, float]], out_path: str | Path) -> Path:
    """Relay transfer time against relay count over a fixed span."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([n for n, _ in rows], [t for _, t in rows], "o-")
    ax.set_xlabel("relays in chain")
    ax.set_ylabel("transfer time [s]")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def plot_coverage_stats(stats: list[CoverageStats], out_path: str | Path) -> Path:
    """Mean coverage curves with one-sigma bands per swarm size."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for st in stats:
        t = np.array(st.timesteps)
        mean = np.array(st.mean)
        std = np.array(st.std)
        line, = ax.plot(t, 100.0 * mean, label=f"{st.robot_count} robots")
        ax.fill_between(
            t, 100.0 * (mean - std), 100.0 * (mean + std),
            alpha=0.2, color=line.get_color(),
        )
    ax.set_xlabel("timestep")
    ax.set_ylabel("coverage [%]")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def plot_coverage_series(series: list[tuple[int, float]], out_path: str | Path) -> Path:
    """Single-run coverage curve."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([t for t, _ in series], [100.0 * c for _, c in series], "-")
    ax.set_xlabel("timestep")
    ax.set_ylabel("coverage [%]")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path
