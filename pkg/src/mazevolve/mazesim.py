"""2D maze environment and robot simulation.

A maze is a set of wall segments with a start and a goal; the robot senses
walls through six rangefinders and the goal through four pie-slice radar
sectors, and drives two actuators (turn, speed change). A genome maps to a
behaviour point: the robot's final position after a step-budgeted run.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels, neat
from .config import SimConfig

RANGEFINDER_ANGLES = np.radians(np.array([-90.0, -45.0, 0.0, 45.0, 90.0, 180.0]))

_DEFAULT_SIM = SimConfig()


class MazeFormatError(ValueError):
    """A maze file that cannot be parsed or breaks a maze invariant."""


@dataclass(frozen=True)
class MazeSpec:
    """Axis bounds, wall segments, start and goal of one maze."""

    width: float
    height: float
    walls: tuple[tuple[float, float, float, float], ...]
    start: tuple[float, float]
    goal: tuple[float, float]
    path_length: float | None = None

    def wall_array(self) -> np.ndarray:
        return np.array(self.walls, dtype=np.float64).reshape(len(self.walls), 4)

    def boundary(self) -> tuple[tuple[float, float, float, float], ...]:
        w, h = self.width, self.height
        return (
            (0.0, 0.0, w, 0.0),
            (w, 0.0, w, h),
            (0.0, h, w, h),
            (0.0, 0.0, 0.0, h),
        )


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    heading: float = 0.0
    linear_velocity: float = 0.0
    angular_velocity: float = 0.0
    radius: float = _DEFAULT_SIM.robot_radius


@dataclass(frozen=True)
class SimulationResult:
    behaviour: tuple[float, float]
    solved: bool
    steps_used: int
    distance_to_goal: float
    trail: tuple[tuple[float, float], ...] | None = None


def _segments_equal(a, b) -> bool:
    return a == b or (a[2], a[3], a[0], a[1]) == b


def validate_maze(spec: MazeSpec) -> None:
    """Raise MazeFormatError when a maze invariant is broken."""
    if spec.width <= 0 or spec.height <= 0:
        raise MazeFormatError("maze size must be positive")
    if spec.start == spec.goal:
        raise MazeFormatError("start and goal must differ")
    for label, (x, y) in (("start", spec.start), ("goal", spec.goal)):
        if not (0.0 < x < spec.width and 0.0 < y < spec.height):
            raise MazeFormatError(f"{label} ({x}, {y}) lies outside the maze bounds")
    for wall in spec.walls:
        if wall[0] == wall[2] and wall[1] == wall[3]:
            raise MazeFormatError(f"zero-length wall {wall}")
    for side in spec.boundary():
        if not any(_segments_equal(side, w) for w in spec.walls):
            raise MazeFormatError(f"missing boundary wall {side}")


def load_maze(text: str) -> MazeSpec:
    """Parse the line-oriented maze format; errors name the offending line."""
    size = start = goal = None
    path_length = None
    walls = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "size" and len(parts) == 3:
                size = (float(parts[1]), float(parts[2]))
            elif parts[0] == "start" and len(parts) == 3:
                start = (float(parts[1]), float(parts[2]))
            elif parts[0] == "goal" and len(parts) == 3:
                goal = (float(parts[1]), float(parts[2]))
            elif parts[0] == "path" and len(parts) == 2:
                path_length = float(parts[1])
            elif parts[0] == "wall" and len(parts) == 5:
                walls.append(tuple(float(v) for v in parts[1:5]))
            else:
                raise ValueError
        except ValueError:
            raise MazeFormatError(f"maze line {lineno}: cannot parse {raw!r}") from None
    if size is None or start is None or goal is None:
        raise MazeFormatError("maze file needs size, start and goal lines")
    spec = MazeSpec(size[0], size[1], tuple(walls), start, goal, path_length)
    validate_maze(spec)
    return spec


def dump_maze(spec: MazeSpec) -> str:
    lines = [
        f"size {spec.width!r} {spec.height!r}",
        f"start {spec.start[0]!r} {spec.start[1]!r}",
        f"goal {spec.goal[0]!r} {spec.goal[1]!r}",
    ]
    if spec.path_length is not None:
        lines.append(f"path {spec.path_length!r}")
    lines += [f"wall {w[0]!r} {w[1]!r} {w[2]!r} {w[3]!r}" for w in spec.walls]
    return "\n".join(lines) + "\n"


def load_maze_file(path: str | Path) -> MazeSpec:
    p = Path(path)
    if not p.is_file():
        raise MazeFormatError(f"maze file not found: {p}")
    return load_maze(p.read_text())


def bundled_maze_names() -> tuple[str, ...]:
    root = resources.files("mazevolve") / "mazes"
    return tuple(sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt")))


def resolve_maze(name_or_path: str) -> MazeSpec:
    """Load a maze from a file path or by bundled name (e.g. ``medium``)."""
    p = Path(name_or_path)
    if p.is_file():
        return load_maze(p.read_text())
    candidate = resources.files("mazevolve") / "mazes" / f"{name_or_path}.txt"
    if candidate.is_file():
        return load_maze(candidate.read_text())
    raise MazeFormatError(f"maze file not found: {name_or_path}")


# ---------------------------------------------------------------------------
# sensors and physics


def rangefinder_reading(
    state: RobotState, maze: MazeSpec, relative_angle: float, config: SimConfig | None = None
) -> float:
    """Normalized distance in [0, 1] along one ray to the nearest wall."""
    config = config or _DEFAULT_SIM
    d = _kernels.ray_distance(
        state.x, state.y, state.heading + relative_angle, maze.wall_array(),
        config.rangefinder_range,
    )
    return d / config.rangefinder_range


def radar_reading(state: RobotState, goal: tuple[float, float]) -> tuple[int, int, int, int]:
    """One-hot flags of the four 90-degree sectors; the goal fires exactly one."""
    sector = _kernels.radar_sector(state.x, state.y, state.heading, goal[0], goal[1])
    return tuple(1 if i == sector else 0 for i in range(4))


def step(
    state: RobotState,
    outputs: tuple[float, float],
    maze: MazeSpec,
    config: SimConfig | None = None,
) -> RobotState:
    """Advance one control step: integrate velocities, slide along any wall."""
    config = config or _DEFAULT_SIM
    x, y, heading, lv, av = _kernels.step_state(
        state.x, state.y, state.heading, state.linear_velocity, state.angular_velocity,
        outputs[0], outputs[1], maze.wall_array(),
        state.radius, config.max_linear_velocity, config.max_angular_velocity,
        config.linear_scale, config.angular_scale,
    )
    return RobotState(float(x), float(y), float(heading), float(lv), float(av), state.radius)


# ---------------------------------------------------------------------------
# simulation


def _flatten_population(genomes) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    node_counts = np.empty(len(genomes), dtype=np.int64)
    offsets = np.zeros(len(genomes) + 1, dtype=np.int64)
    srcs, dsts, ws = [], [], []
    for i, g in enumerate(genomes):
        nn, src, dst, w = neat.flatten_genome(g)
        node_counts[i] = nn
        offsets[i + 1] = offsets[i] + src.size
        srcs.append(src)
        dsts.append(dst)
        ws.append(w)
    e_src = np.concatenate(srcs) if srcs else np.empty(0, dtype=np.int64)
    e_dst = np.concatenate(dsts) if dsts else np.empty(0, dtype=np.int64)
    e_w = np.concatenate(ws) if ws else np.empty(0, dtype=np.float64)
    return node_counts, offsets, e_src, e_dst, e_w, int(node_counts.max())


def simulate_population(
    maze: MazeSpec,
    genomes,
    step_budget: int,
    config: SimConfig | None = None,
    slope: float = 4.9,
    check_invariants: bool = False,
    record_trails: bool = False,
):
    """Simulate every genome; returns (behaviours, solved, steps, distances, diag, trails)."""
    if step_budget < 1:
        raise ValueError("step budget must be >= 1")
    config = config or _DEFAULT_SIM
    n = len(genomes)
    node_counts, offsets, e_src, e_dst, e_w, max_nodes = _flatten_population(genomes)
    walls = maze.wall_array()
    trails = np.zeros((n if record_trails else 1, step_budget + 1, 2))
    out_xy = np.zeros((n, 2))
    out_solved = np.zeros(n, dtype=np.bool_)
    out_steps = np.zeros(n, dtype=np.int64)
    out_dist = np.zeros(n)
    out_diag = np.zeros((n, 3))
    _kernels.simulate_batch(
        walls,
        maze.start[0],
        maze.start[1],
        maze.goal[0],
        maze.goal[1],
        RANGEFINDER_ANGLES,
        node_counts,
        offsets,
        e_src,
        e_dst,
        e_w,
        1 + neat.N_INPUTS,
        max_nodes,
        step_budget,
        config.robot_radius,
        config.rangefinder_range,
        config.max_linear_velocity,
        config.max_angular_velocity,
        config.linear_scale,
        config.angular_scale,
        config.success_radius,
        slope,
        record_trails,
        trails,
        check_invariants,
        out_xy,
        out_solved,
        out_steps,
        out_dist,
        out_diag,
    )
    return out_xy, out_solved, out_steps, out_dist, out_diag, trails


def simulate(
    maze: MazeSpec,
    genome: neat.Genome,
    step_budget: int,
    config: SimConfig | None = None,
    slope: float = 4.9,
    record_trail: bool = False,
) -> SimulationResult:
    """Run one genome's robot from the maze start; pure in all arguments."""
    xy, solved, steps, dist, _, trails = simulate_population(
        maze, [genome], step_budget, config, slope, record_trails=record_trail
    )
    trail = None
    if record_trail:
        trail = tuple((float(x), float(y)) for x, y in trails[0, : steps[0] + 1])
    return SimulationResult(
        behaviour=(float(xy[0, 0]), float(xy[0, 1])),
        solved=bool(solved[0]),
        steps_used=int(steps[0]),
        distance_to_goal=float(dist[0]),
        trail=trail,
    )
