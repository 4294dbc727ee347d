"""Discretized lava-tube floor: occupancy grid, sensing, and geometry queries.

The tube floor is a rectangle [0, length] x [0, width] in world units,
discretized into square cells of side 1/resolution.  Cell (i, j) covers
[i/res, (i+1)/res) x [j/res, (j+1)/res); a world point maps to the cell
containing it (floor convention, so a point on a shared edge belongs to
the higher-index cell).  Cells are unexplored until a robot's sensing
disk covers their center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

Point = tuple[float, float]


class CellState(IntEnum):
    """Per-cell ground-truth occupancy combined with exploration progress."""

    UNEXPLORED = 0
    EXPLORED_FREE = 1
    OBSTACLE = 2


@dataclass(frozen=True)
class Obstacle:
    """Circular boulder or breakdown pile on the tube floor."""

    x: float
    y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"obstacle radius must be positive, got {self.radius}")

    @property
    def center(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Static description of a tube floor; build_environment turns it into grids."""

    length: float = 50.0
    width: float = 8.0
    resolution: int = 100
    obstacles: tuple[Obstacle, ...] = ()

    def __post_init__(self):
        if self.length <= 0.0 or self.width <= 0.0:
            raise ValueError("environment length and width must be positive")
        if self.resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {self.resolution}")
        for ob in self.obstacles:
            if not (0.0 <= ob.x <= self.length and 0.0 <= ob.y <= self.width):
                raise ValueError(
                    f"obstacle center ({ob.x}, {ob.y}) outside the tube rectangle"
                )


class Environment:
    """Mutable grid state for one simulation run.

    Attributes:
        spec: the immutable description this grid was built from.
        states: int8 array of CellState values, shape (nx, ny) with
            nx = round(length * resolution), ny = round(width * resolution).
        revealed: per-obstacle flags, set once any cell of that obstacle's
            disk has been covered by a sensing sweep.
    """

    def __init__(self, spec: EnvironmentSpec):
        self.spec = spec
        res = spec.resolution
        self.nx = int(round(spec.length * res))
        self.ny = int(round(spec.width * res))
        self.states = np.zeros((self.nx, self.ny), dtype=np.int8)
        self.revealed = np.zeros(len(spec.obstacles), dtype=bool)

        # Cell centers along each axis, reused by sensing and rasterization.
        self._cx = (np.arange(self.nx) + 0.5) / res
        self._cy = (np.arange(self.ny) + 0.5) / res

        # Rasterize obstacles: a cell is OBSTACLE when its center lies inside
        # the disk.  Keep each obstacle's cell-center coordinates around so
        # reveal checks stay cheap.
        self._obstacle_cells: list[tuple[np.ndarray, np.ndarray]] = []
        for ob in spec.obstacles:
            ix0 = max(0, int(math.floor((ob.x - ob.radius) * res)))
            ix1 = min(self.nx, int(math.ceil((ob.x + ob.radius) * res)))
            iy0 = max(0, int(math.floor((ob.y - ob.radius) * res)))
            iy1 = min(self.ny, int(math.ceil((ob.y + ob.radius) * res)))
            cx = self._cx[ix0:ix1, None]
            cy = self._cy[None, iy0:iy1]
            inside = (cx - ob.x) ** 2 + (cy - ob.y) ** 2 <= ob.radius**2
            self.states[ix0:ix1, iy0:iy1][inside] = CellState.OBSTACLE
            ii, jj = np.nonzero(inside)
            self._obstacle_cells.append(
                (self._cx[ix0 + ii].copy(), self._cy[iy0 + jj].copy())
            )

        self.free_total = int(np.count_nonzero(self.states != CellState.OBSTACLE))
        self.explored_count = 0
        # Frontier masks maintained incrementally per adjacency, built lazily.
        self._frontier: dict[int, list] = {}

    def cell_index(self, p: Point) -> tuple[int, int]:
        """Grid indices of the cell containing p; may fall outside the grid."""
        res = self.spec.resolution
        return (int(math.floor(p[0] * res)), int(math.floor(p[1] * res)))

    def reveal_obstacle(self, k: int) -> None:
        """Force obstacle k into the revealed set (e.g. after a collision)."""
        self.revealed[k] = True


def build_environment(spec: EnvironmentSpec) -> Environment:
    """Construct the mutable grid state for a tube description."""
    return Environment(spec)


def mark_explored(env: Environment, center: Point, radius: float) -> int:
    """Apply one sensing sweep: a disk of the given radius around center.

    Unexplored free cells whose centers fall inside the disk become
    explored; obstacle cells keep their state but contribute to revealing
    their parent obstacle.  The disk is clipped at the rectangle edges.

    Returns the number of cells newly marked explored.
    """
    cx, cy = center
    spec = env.spec
    if not (0.0 <= cx <= spec.length and 0.0 <= cy <= spec.width):
        raise ValueError(f"sensing center ({cx}, {cy}) outside the tube rectangle")
    if radius <= 0.0:
        raise ValueError(f"sensing radius must be positive, got {radius}")

    res = spec.resolution
    ix0 = max(0, int(math.floor((cx - radius) * res)))
    ix1 = min(env.nx, int(math.ceil((cx + radius) * res)))
    iy0 = max(0, int(math.floor((cy - radius) * res)))
    iy1 = min(env.ny, int(math.ceil((cy + radius) * res)))
    if ix0 >= ix1 or iy0 >= iy1:
        return 0

    window = env.states[ix0:ix1, iy0:iy1]
    dx = env._cx[ix0:ix1, None] - cx
    dy = env._cy[None, iy0:iy1] - cy
    in_disk = dx * dx + dy * dy <= radius * radius

    newly = in_disk & (window == CellState.UNEXPLORED)
    count = int(np.count_nonzero(newly))
    if count:
        window[newly] = CellState.EXPLORED_FREE
        env.explored_count += count
        for adjacency, entry in env._frontier.items():
            _refresh_frontier_window(env, adjacency, entry, ix0, ix1, iy0, iy1)

    # An obstacle becomes revealed as soon as the sweep touches any of its
    # rasterized cells.  Cheap bounding test first.
    r2 = radius * radius
    for k, ob in enumerate(spec.obstacles):
        if env.revealed[k]:
            continue
        gap = math.hypot(ob.x - cx, ob.y - cy) - ob.radius
        if gap > radius:
            continue
        ox, oy = env._obstacle_cells[k]
        if ox.size and np.any((ox - cx) ** 2 + (oy - cy) ** 2 <= r2):
            env.revealed[k] = True
    return count


def coverage_fraction(env: Environment) -> float:
    """Explored fraction of the free (non-obstacle) cells, in [0, 1]."""
    if env.free_total == 0:
        return 1.0
    return env.explored_count / env.free_total


def _frontier_mask(states: np.ndarray, adjacency: int) -> np.ndarray:
    """Frontier cells of a state array: explored free cells next to unexplored."""
    unex = states == CellState.UNEXPLORED
    near = np.zeros_like(unex)
    near[:-1, :] |= unex[1:, :]
    near[1:, :] |= unex[:-1, :]
    near[:, :-1] |= unex[:, 1:]
    near[:, 1:] |= unex[:, :-1]
    if adjacency == 8:
        near[:-1, :-1] |= unex[1:, 1:]
        near[1:, 1:] |= unex[:-1, :-1]
        near[:-1, 1:] |= unex[1:, :-1]
        near[1:, :-1] |= unex[:-1, 1:]
    return (states == CellState.EXPLORED_FREE) & near


def _frontier_entry(env: Environment, adjacency: int) -> list:
    """[mask, count, points] for an adjacency; built on first use, then
    maintained incrementally.  points is a lazy cache of the extracted
    coordinates, dropped whenever the mask changes."""
    entry = env._frontier.get(adjacency)
    if entry is None:
        mask = _frontier_mask(env.states, adjacency)
        entry = [mask, int(np.count_nonzero(mask)), None]
        env._frontier[adjacency] = entry
    return entry


def _refresh_frontier_window(
    env: Environment, adjacency: int, entry: list, ix0: int, ix1: int, iy0: int, iy1: int
) -> None:
    """Recompute the frontier mask where a state-window change can reach.

    A cell's frontier status depends on its own state and its neighbors',
    so the affected region is the changed window grown by one cell; the
    slice passed to the mask kernel grows by one more so neighbor reads
    stay in bounds.
    """
    ax0, ax1 = max(0, ix0 - 1), min(env.nx, ix1 + 1)
    ay0, ay1 = max(0, iy0 - 1), min(env.ny, iy1 + 1)
    hx0, hx1 = max(0, ax0 - 1), min(env.nx, ax1 + 1)
    hy0, hy1 = max(0, ay0 - 1), min(env.ny, ay1 + 1)
    sub = _frontier_mask(env.states[hx0:hx1, hy0:hy1], adjacency)
    fresh = sub[ax0 - hx0 : ax1 - hx0, ay0 - hy0 : ay1 - hy0]
    mask = entry[0]
    stale = mask[ax0:ax1, ay0:ay1]
    entry[1] += int(np.count_nonzero(fresh)) - int(np.count_nonzero(stale))
    mask[ax0:ax1, ay0:ay1] = fresh
    entry[2] = None


def frontier_cell_count(env: Environment, adjacency: int = 4) -> int:
    """Number of frontier cells, maintained incrementally (O(1) when warm)."""
    if adjacency not in (4, 8):
        raise ValueError(f"adjacency must be 4 or 8, got {adjacency}")
    return _frontier_entry(env, adjacency)[1]


def free_boundary(env: Environment, adjacency: int = 4) -> np.ndarray:
    """Centers of frontier cells: explored free cells adjacent to unexplored.

    Adjacency is 4-connected by default; pass 8 to include diagonals.
    Returns an (n, 2) float array of world coordinates, ordered by grid
    index (row-major), empty when exploration is complete.
    """
    if adjacency not in (4, 8):
        raise ValueError(f"adjacency must be 4 or 8, got {adjacency}")
    entry = _frontier_entry(env, adjacency)
    if entry[1] == 0:
        return np.empty((0, 2), dtype=float)
    if entry[2] is None:
        idx = np.argwhere(entry[0])
        entry[2] = (idx + 0.5) / env.spec.resolution
        entry[2].setflags(write=False)
    return entry[2]


def point_in_explored(env: Environment, p: Point) -> bool:
    """True when p lies in a cell already marked explored free."""
    ix, iy = env.cell_index(p)
    if not (0 <= ix < env.nx and 0 <= iy < env.ny):
        return False
    return env.states[ix, iy] == CellState.EXPLORED_FREE


def point_to_segment_distance(p: Point, a: Point, b: Point) -> float:
    """Euclidean distance from p to the closed segment a-b."""
    ax, ay = a
    bx, by = b
    px, py = p
    vx, vy = bx - ax, by - ay
    seg2 = vx * vx + vy * vy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * vx + (py - ay) * vy) / seg2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def segment_intersects_obstacle(a: Point, b: Point, obstacles) -> bool:
    """True when the segment a-b passes through (or grazes) any disk.

    The endpoints must be distinct; a zero-length segment is a caller bug.
    """
    if a == b:
        raise ValueError("segment endpoints coincide")
    for ob in obstacles:
        if point_to_segment_distance(ob.center, a, b) <= ob.radius:
            return True
    return False
