"""Evolutionary runs and the measurements built on top of them.

One run couples the NEAT engine to a maze and a reward strategy and logs a
RunRecord per generation. Aggregations reproduce the study measurements:
efficiency curves (average maximum fitness over evaluations), robustness
curves (cumulative successes), heatmap entropy of visited positions, genome
complexity/diversity metrics, parameter sensitivity sweeps and the pairwise
success table over generated-maze benchmarks.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import neat
from .config import RunConfig, StrategyConfig
from .mazesim import MazeSpec, resolve_maze, simulate_population
from .strategies import make_strategy, objective_scores

REAL_FMT = "{:.12g}"


@dataclass
class GenerationLog:
    max_fitness: float
    behaviours: np.ndarray
    success: bool


@dataclass
class RunRecord:
    """Full per-generation log of one evolutionary run."""

    config: RunConfig
    seed: int
    generations: list[GenerationLog] = field(default_factory=list)
    first_success_evaluation: int | None = None
    final_metrics: neat.GenomicMetrics | None = None
    champion: neat.Genome | None = None

    @property
    def population(self) -> int:
        return self.config.population

    @property
    def solved(self) -> bool:
        return self.first_success_evaluation is not None

    def running_max_fitness(self) -> np.ndarray:
        return np.maximum.accumulate([g.max_fitness for g in self.generations])

    def all_behaviours(self) -> np.ndarray:
        return np.concatenate([g.behaviours for g in self.generations])


@dataclass
class Heatmap:
    counts: np.ndarray
    total: int
    entropy: float
    cell_size: float


def _adapt_threshold(threshold: float, n_species: int, config) -> float:
    if n_species > config.target_species:
        return threshold + config.compat_threshold_step
    if n_species < config.target_species:
        return max(config.compat_threshold_step, threshold - config.compat_threshold_step)
    return threshold


def run(config: RunConfig) -> RunRecord:
    """Execute one evolutionary run; deterministic in the config's seed."""
    config.validate()
    maze = resolve_maze(config.maze)
    rng = np.random.Generator(np.random.Philox(config.seed))
    strategy = make_strategy(config.strategy, maze, config.population)
    population, innovations = neat.init_population((10, 2), config.population, rng)
    threshold = config.neat.compat_threshold
    record = RunRecord(config=config, seed=config.seed)
    champion_fitness = -math.inf
    for generation in range(1, config.generations + 1):
        behaviours, solved, _, dists, _, _ = simulate_population(
            maze,
            population.members,
            config.steps,
            config.sim,
            slope=config.neat.sigmoid_slope,
        )
        fitness = objective_scores(dists)
        best = int(np.argmax(fitness))
        if fitness[best] > champion_fitness:
            champion_fitness = float(fitness[best])
            record.champion = population.members[best]
        if record.first_success_evaluation is None and solved.any():
            first = int(np.argmax(solved))
            record.first_success_evaluation = (generation - 1) * config.population + first + 1
        record.generations.append(
            GenerationLog(
                max_fitness=float(fitness[best]),
                behaviours=behaviours,
                success=bool(solved.any()),
            )
        )
        if config.stop_on_success and record.solved:
            break
        if generation < config.generations:
            scores = strategy.scores(behaviours, rng)
            population = neat.reproduce(
                population, scores, config.neat, rng, innovations, threshold
            )
            threshold = _adapt_threshold(threshold, len(population.species), config.neat)
    record.final_metrics = neat.genomic_metrics(population.members, config.neat)
    return record


def _run_job(config: RunConfig) -> RunRecord:
    return run(config)


def _run_job_safe(config: RunConfig):
    try:
        return run(config)
    except Exception as exc:  # isolated job: report, don't kill the batch
        return exc


def run_many(
    configs: list[RunConfig], workers: int = 1, tolerate_failures: bool = False
):
    """Run several configs, in manifest order, optionally across processes.

    With ``tolerate_failures`` a crashed run yields its exception in place of
    a record instead of aborting the remaining jobs.
    """
    job = _run_job_safe if tolerate_failures else _run_job
    if workers <= 1 or len(configs) <= 1:
        return [job(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, configs))


# ---------------------------------------------------------------------------
# aggregate measurements


def efficiency_curve(records: list[RunRecord]):
    """(evaluations, mean running-max fitness, 95% CI half-width) series."""
    if not records:
        raise ValueError("efficiency curve needs at least one record")
    pop = records[0].population
    longest = max(len(r.generations) for r in records)
    table = np.empty((len(records), longest))
    for i, r in enumerate(records):
        rm = r.running_max_fitness()
        table[i, : len(rm)] = rm
        table[i, len(rm):] = rm[-1]  # early-stopped runs hold their best
    evaluations = pop * np.arange(1, longest + 1)
    mean = table.mean(axis=0)
    if len(records) > 1:
        ci = 1.96 * table.std(axis=0, ddof=1) / math.sqrt(len(records))
    else:
        ci = np.zeros(longest)
    return evaluations, mean, ci


def robustness_curve(records: list[RunRecord]):
    """(evaluations, cumulative success count) non-decreasing step series."""
    if not records:
        raise ValueError("robustness curve needs at least one record")
    firsts = sorted(r.first_success_evaluation for r in records if r.solved)
    evaluations = np.array(firsts, dtype=np.int64)
    successes = np.arange(1, len(firsts) + 1, dtype=np.int64)
    return evaluations, successes


def successes_at(records: list[RunRecord], evaluations: int | None = None) -> int:
    count = 0
    for r in records:
        if r.solved and (evaluations is None or r.first_success_evaluation <= evaluations):
            count += 1
    return count


def heatmap_entropy(behaviours: np.ndarray, maze: MazeSpec, cell_size: float) -> Heatmap:
    """Normalized ``H = -(1/log C) * sum p log p`` over grid visit counts.

    C counts every cell inside the maze bounds, so uniform occupancy scores 1
    and a single-cell concentration scores 0.
    """
    pts = np.asarray(behaviours, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 1:
        raise ValueError("entropy needs at least one visit")
    nx = max(1, int(math.ceil(maze.width / cell_size)))
    ny = max(1, int(math.ceil(maze.height / cell_size)))
    if nx * ny < 2:
        raise ValueError("entropy needs at least two grid cells")
    ix = np.minimum((pts[:, 0] / cell_size).astype(np.int64), nx - 1)
    iy = np.minimum((pts[:, 1] / cell_size).astype(np.int64), ny - 1)
    ix = np.maximum(ix, 0)
    iy = np.maximum(iy, 0)
    counts = np.zeros((nx, ny), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    total = int(counts.sum())
    p = counts[counts > 0] / total
    entropy = float(-np.sum(p * np.log(p)) / math.log(nx * ny))
    return Heatmap(counts=counts, total=total, entropy=entropy, cell_size=cell_size)


# ---------------------------------------------------------------------------
# sweeps and the generated-maze benchmark


@dataclass
class SweepRow:
    params: dict
    successes: int
    mean_evaluations: float | None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    selected: SweepRow


def _selection_key(row: SweepRow):
    mean = row.mean_evaluations if row.mean_evaluations is not None else math.inf
    return (-row.successes, mean)


def sensitivity_sweep(
    base: RunConfig,
    grid: list[dict],
    runs_per_cell: int,
    workers: int = 1,
) -> SweepResult:
    """Run every parameter cell over ``runs_per_cell`` seeds and rank them.

    Selection follows: most successes first, ties broken by fewest mean
    evaluations to success.
    """
    if not grid:
        raise ValueError("sweep grid is empty")
    if runs_per_cell < 1:
        raise ValueError("runs_per_cell must be >= 1")
    configs = []
    for params in grid:
        strategy = replace(base.strategy, **params)
        for r in range(runs_per_cell):
            configs.append(
                replace(base, strategy=strategy, seed=base.seed + r, stop_on_success=True)
            )
    records = run_many(configs, workers)
    rows = []
    for c, params in enumerate(grid):
        cell = records[c * runs_per_cell : (c + 1) * runs_per_cell]
        evals = [r.first_success_evaluation for r in cell if r.solved]
        rows.append(
            SweepRow(
                params=dict(params),
                successes=len(evals),
                mean_evaluations=float(np.mean(evals)) if evals else None,
            )
        )
    selected = min(rows, key=_selection_key)
    return SweepResult(rows=rows, selected=selected)


@dataclass
class BenchmarkResult:
    strategies: list[str]
    maze_files: list[str]
    successes: np.ndarray            # (mazes, strategies) success counts
    greater_pct: np.ndarray          # (A, B): % of mazes where A strictly beats B
    records: dict                    # strategy kind -> list[RunRecord]

    def totals(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column means over off-diagonal cells."""
        k = len(self.strategies)
        off = ~np.eye(k, dtype=bool)
        rows = np.array([self.greater_pct[i, off[i]].mean() for i in range(k)])
        cols = np.array([self.greater_pct[off[:, j], j].mean() for j in range(k)])
        return rows, cols


def strictly_greater_matrix(successes: np.ndarray) -> np.ndarray:
    """Percent of mazes (rows) where column strategy A strictly beats B."""
    n_s = successes.shape[1]
    greater = np.zeros((n_s, n_s))
    for a in range(n_s):
        for b in range(n_s):
            if a != b:
                greater[a, b] = 100.0 * np.mean(successes[:, a] > successes[:, b])
    return greater


def generated_benchmark(
    maze_files: list[str],
    strategies: list[StrategyConfig],
    runs_per_maze: int,
    base: RunConfig,
    workers: int = 1,
) -> BenchmarkResult:
    """Cross-method comparison over a set of generated mazes.

    Returns per-(maze, strategy) success counts and the percentage matrix of
    mazes where the row strategy has strictly more successes than the column
    strategy.
    """
    if not maze_files or not strategies:
        raise ValueError("benchmark needs mazes and strategies")
    configs = []
    for maze_file in maze_files:
        for strategy in strategies:
            for r in range(runs_per_maze):
                configs.append(
                    replace(
                        base,
                        maze=str(maze_file),
                        strategy=strategy,
                        seed=base.seed + r,
                        stop_on_success=True,
                    )
                )
    records = run_many(configs, workers)
    kinds = [s.kind for s in strategies]
    n_m, n_s = len(maze_files), len(strategies)
    successes = np.zeros((n_m, n_s), dtype=np.int64)
    by_kind = {k: [] for k in kinds}
    i = 0
    for m in range(n_m):
        for s in range(n_s):
            cell = records[i : i + runs_per_maze]
            i += runs_per_maze
            successes[m, s] = sum(1 for r in cell if r.solved)
            by_kind[kinds[s]].extend(cell)
    greater = strictly_greater_matrix(successes)
    return BenchmarkResult(kinds, [str(m) for m in maze_files], successes, greater, by_kind)


# ---------------------------------------------------------------------------
# persistence


def write_run_csv(record: RunRecord, path: str | Path) -> None:
    """One CSV per run: per-generation rows plus a key,value metric footer."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation", "evaluation", "max_fitness", "success_flag"])
    for g, log in enumerate(record.generations, start=1):
        writer.writerow(
            [g, g * record.population, REAL_FMT.format(log.max_fitness), int(log.success)]
        )
    footer = {
        "seed": record.seed,
        "population": record.population,
        "strategy": record.config.strategy.kind,
        "maze": record.config.maze,
        "solved": int(record.solved),
        "first_success_evaluation": record.first_success_evaluation or "",
    }
    metrics = record.final_metrics
    if metrics is not None:
        footer.update(
            mean_connections=REAL_FMT.format(metrics.mean_connections),
            mean_hidden_nodes=REAL_FMT.format(metrics.mean_hidden_nodes),
            mean_compatibility=REAL_FMT.format(metrics.mean_compatibility),
            mean_disjoint=REAL_FMT.format(metrics.mean_disjoint),
            mean_weight_difference=REAL_FMT.format(metrics.mean_weight_difference),
            mean_excess=REAL_FMT.format(metrics.mean_excess),
        )
    for key, value in footer.items():
        buf.write(f"#{key},{value}\n")
    Path(path).write_text(buf.getvalue())


@dataclass
class RunSummary:
    """Re-parsed form of a persisted run CSV."""

    generations: list[int]
    evaluations: list[int]
    max_fitness: list[float]
    success_flags: list[int]
    footer: dict


def read_run_csv(path: str | Path) -> RunSummary:
    generations, evaluations, fitness, flags = [], [], [], []
    footer = {}
    lines = Path(path).read_text().splitlines()
    for row in csv.reader(lines[1:], lineterminator="\n"):
        if not row:
            continue
        if row[0].startswith("#"):
            footer[row[0][1:]] = row[1] if len(row) > 1 else ""
            continue
        generations.append(int(row[0]))
        evaluations.append(int(row[1]))
        fitness.append(float(row[2]))
        flags.append(int(row[3]))
    return RunSummary(generations, evaluations, fitness, flags, footer)


def write_behaviour_csv(record: RunRecord, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation", "individual", "x", "y"])
    for g, log in enumerate(record.generations, start=1):
        for i, (x, y) in enumerate(log.behaviours):
            writer.writerow([g, i, REAL_FMT.format(x), REAL_FMT.format(y)])
    Path(path).write_text(buf.getvalue())


def write_curve_csv(path: str | Path, columns: dict[str, np.ndarray]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(names)
    for row in zip(*(columns[n] for n in names)):
        writer.writerow(
            [REAL_FMT.format(v) if isinstance(v, float) else v for v in row]
        )
    Path(path).write_text(buf.getvalue())


def heatmap_text(heatmap: Heatmap) -> str:
    """Plain-text grid, rows top-down."""
    nx, ny = heatmap.counts.shape
    lines = []
    for j in reversed(range(ny)):
        lines.append(" ".join(str(int(heatmap.counts[i, j])) for i in range(nx)))
    return "\n".join(lines) + "\n"


def heatmap_pgm(heatmap: Heatmap) -> str:
    """Portable graymap (P2), visit counts scaled to 0..255, rows top-down."""
    nx, ny = heatmap.counts.shape
    peak = max(1, int(heatmap.counts.max()))
    lines = ["P2", f"{nx} {ny}", "255"]
    for j in reversed(range(ny)):
        lines.append(
            " ".join(str(int(round(255.0 * heatmap.counts[i, j] / peak))) for i in range(nx))
        )
    return "\n".join(lines) + "\n"
