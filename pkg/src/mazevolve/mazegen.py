"""Random maze generation by recursive division, plus solvability checks.

Each division adds one axis-aligned wall with a single randomly placed hole,
splitting an area in two; areas too narrow for the corridor minimum are left
alone. Every emitted maze is verified traversable by flood fill at robot
clearance before it leaves this module.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._kernels import wall_clearance
from .config import GeneratorConfig
from .mazesim import MazeSpec, validate_maze

logger = logging.getLogger(__name__)

_ENDPOINT_MARGIN = 1.0  # keep wall tips clear of existing holes


@dataclass
class GenerationReport:
    subdivisions_target: int
    subdivisions_performed: int
    retries: int


def _sample_split(rng, lo: float, hi: float) -> float:
    return float(rng.uniform(lo, hi))


def _point_in_hole(x: float, y: float, holes) -> bool:
    for vertical, coord, lo, hi in holes:
        if vertical and x == coord and lo - _ENDPOINT_MARGIN < y < hi + _ENDPOINT_MARGIN:
            return True
        if not vertical and y == coord and lo - _ENDPOINT_MARGIN < x < hi + _ENDPOINT_MARGIN:
            return True
    return False


def _divide_once(area, rng, config: GeneratorConfig, holes):
    """Try to split one area; returns (walls, hole, sub-areas) or None."""
    x0, y0, x1, y1 = area
    options = []
    if x1 - x0 >= 2 * config.corridor_min:
        options.append(True)  # vertical wall
    if y1 - y0 >= 2 * config.corridor_min:
        options.append(False)
    rng.shuffle(options)
    for vertical in options:
        for _ in range(32):
            if vertical:
                c = _sample_split(rng, x0 + config.corridor_min, x1 - config.corridor_min)
                ends = ((c, y0), (c, y1))
                span = (y0, y1)
            else:
                c = _sample_split(rng, y0 + config.corridor_min, y1 - config.corridor_min)
                ends = ((x0, c), (x1, c))
                span = (x0, x1)
            if any(_point_in_hole(ex, ey, holes) for ex, ey in ends):
                continue
            gap_lo = span[0] + _ENDPOINT_MARGIN
            gap_hi = span[1] - config.hole_width - _ENDPOINT_MARGIN
            hole_at = _sample_split(rng, gap_lo, gap_hi)
            hole = (vertical, c, hole_at, hole_at + config.hole_width)
            if vertical:
                walls = ((c, y0, c, hole_at), (c, hole_at + config.hole_width, c, y1))
                subs = ((x0, y0, c, y1), (c, y0, x1, y1))
            else:
                walls = ((span[0], c, hole_at, c), (hole_at + config.hole_width, c, span[1], c))
                subs = ((x0, y0, x1, c), (x0, c, x1, y1))
            return walls, hole, subs
    return None


def _generate_once(config: GeneratorConfig, rng) -> tuple[MazeSpec, int, int]:
    target = int(rng.integers(config.subdivisions_min, config.subdivisions_max + 1))
    w, h = config.width, config.height
    walls = [(0.0, 0.0, w, 0.0), (w, 0.0, w, h), (0.0, h, w, h), (0.0, 0.0, 0.0, h)]
    holes: list[tuple[bool, float, float, float]] = []
    queue = deque([(0.0, 0.0, w, h)])
    performed = 0
    while queue and performed < target:
        area = queue.popleft()
        division = _divide_once(area, rng, config, holes)
        if division is None:
            continue
        new_walls, hole, subs = division
        walls.extend(new_walls)
        holes.append(hole)
        queue.extend(subs)
        performed += 1
    inset = config.start_inset
    spec = MazeSpec(
        width=w,
        height=h,
        walls=tuple(walls),
        start=(inset, inset),
        goal=(w - inset, h - inset),
    )
    return spec, performed, target


def generate_with_report(
    config: GeneratorConfig, rng, robot_radius: float = 8.0, max_attempts: int = 100
) -> tuple[MazeSpec, GenerationReport]:
    """Generate a verified-solvable maze; regenerates on a failed verification."""
    config.validate(robot_radius)
    for attempt in range(max_attempts):
        spec, performed, target = _generate_once(config, rng)
        validate_maze(spec)
        if verify_solvable(spec, config.verify_cell_size, robot_radius):
            if attempt:
                logger.info("maze generation needed %d retries", attempt)
            return spec, GenerationReport(target, performed, attempt)
    raise RuntimeError(f"no solvable maze after {max_attempts} attempts")


def generate(config: GeneratorConfig, rng, robot_radius: float = 8.0) -> MazeSpec:
    spec, _ = generate_with_report(config, rng, robot_radius)
    return spec


# ---------------------------------------------------------------------------
# solvability


def _free_grid(maze: MazeSpec, cell_size: float, clearance: float):
    nx = max(1, int(math.ceil(maze.width / cell_size)))
    ny = max(1, int(math.ceil(maze.height / cell_size)))
    walls = maze.wall_array()
    free = np.zeros((nx, ny), dtype=np.bool_)
    for i in range(nx):
        cx = (i + 0.5) * cell_size
        for j in range(ny):
            cy = (j + 0.5) * cell_size
            free[i, j] = wall_clearance(cx, cy, walls) >= clearance
    return free


def _cell_of(point, cell_size, shape):
    i = min(int(point[0] / cell_size), shape[0] - 1)
    j = min(int(point[1] / cell_size), shape[1] - 1)
    return i, j


def verify_solvable(maze: MazeSpec, cell_size: float, clearance: float = 8.0) -> bool:
    """Flood-fill reachability from start to goal at robot clearance."""
    free = _free_grid(maze, cell_size, clearance)
    start = _cell_of(maze.start, cell_size, free.shape)
    goal = _cell_of(maze.goal, cell_size, free.shape)
    if not free[start]:
        logger.warning("start cell %s is blocked at clearance %.1f", start, clearance)
        return False
    if not free[goal]:
        logger.warning("goal cell %s is blocked at clearance %.1f", goal, clearance)
        return False
    seen = np.zeros_like(free)
    seen[start] = True
    frontier = deque([start])
    while frontier:
        i, j = frontier.popleft()
        if (i, j) == goal:
            return True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < free.shape[0] and 0 <= nj < free.shape[1]:
                if free[ni, nj] and not seen[ni, nj]:
                    seen[ni, nj] = True
                    frontier.append((ni, nj))
    return False


def grid_path_length(
    maze: MazeSpec, cell_size: float = 4.0, clearance: float = 8.0
) -> float | None:
    """Shortest traversable path length estimate on an 8-connected grid."""
    free = _free_grid(maze, cell_size, clearance)
    start = _cell_of(maze.start, cell_size, free.shape)
    goal = _cell_of(maze.goal, cell_size, free.shape)
    if not (free[start] and free[goal]):
        return None
    dist = np.full(free.shape, np.inf)
    dist[start] = 0.0
    heap = [(0.0, start)]
    moves = [
        (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
        (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
        (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2)),
    ]
    while heap:
        d, (i, j) = heapq.heappop(heap)
        if (i, j) == goal:
            return d * cell_size
        if d > dist[i, j]:
            continue
        for di, dj, cost in moves:
            ni, nj = i + di, j + dj
            if 0 <= ni < free.shape[0] and 0 <= nj < free.shape[1] and free[ni, nj]:
                nd = d + cost
                if nd < dist[ni, nj]:
                    dist[ni, nj] = nd
                    heapq.heappush(heap, (nd, (ni, nj)))
    return None
