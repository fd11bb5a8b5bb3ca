"""Command-line entry point gluing the modules into reproducible experiments.

Subcommands: ``run`` one evolutionary run, ``batch`` a manifest of runs,
``generate`` random benchmark mazes, ``sensitivity`` a parameter sweep, and
``bench-generated`` the cross-method table over generated mazes.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment, mazegen
from .config import (
    ConfigError,
    GeneratorConfig,
    RunConfig,
    StrategyConfig,
    apply_keys,
    load_run_config,
    parse_flat,
)
from .mazesim import MazeFormatError, dump_maze, resolve_maze
from .neat import save_genome


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_config(args) -> RunConfig:
    overrides = {}
    if getattr(args, "maze", None):
        overrides["experiment.maze"] = args.maze
    if getattr(args, "strategy", None):
        overrides["strategy.kind"] = args.strategy
    if args.config:
        config = load_run_config(args.config, overrides)
    else:
        config = apply_keys(RunConfig(), overrides)
    if args.seed is not None:
        config.seed = args.seed
    config.validate()
    return config


def _write_run_outputs(record, out_dir: Path, stem: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    experiment.write_run_csv(record, csv_path)
    if record.champion is not None:
        (out_dir / f"{stem}.genome.txt").write_text(save_genome(record.champion))
    if record.config.dump_behaviours:
        experiment.write_behaviour_csv(record, out_dir / f"{stem}.behaviours.csv")
    return csv_path


def cmd_run(args) -> int:
    config = _load_config(args)
    resolve_maze(config.maze)  # fail fast with the offending path
    record = experiment.run(config)
    stem = f"{Path(args.config).stem if args.config else config.strategy.kind}_seed{config.seed}"
    _write_run_outputs(record, Path(args.out), stem)
    final_max = record.running_max_fitness()[-1]
    evals = record.first_success_evaluation if record.solved else "-"
    print(
        f"solved={'yes' if record.solved else 'no'} "
        f"evaluations={evals} max_fitness={final_max:.6g}"
    )
    return 0


def _parse_manifest(path: Path):
    """Batch manifest: ``out``/``workers`` keys plus one ``run`` line per job."""
    if not path.is_file():
        raise ConfigError(f"manifest not found: {path}")
    out_dir = None
    workers = 1
    jobs: list[tuple[Path, int]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "out":
            out_dir = Path(value)
        elif key == "workers":
            workers = int(value)
        elif key == "run":
            parts = value.split()
            if len(parts) != 2:
                raise ConfigError(f"manifest line {lineno}: expected 'run = CONFIG SEED'")
            jobs.append(((path.parent / parts[0]).resolve(), int(parts[1])))
        else:
            raise ConfigError(f"manifest line {lineno}: unknown key {key!r}")
    if not jobs:
        raise ConfigError("manifest lists no runs")
    seen = set()
    for job in jobs:
        if job in seen:
            raise ConfigError(f"duplicate (config, seed) pair in manifest: {job}")
        seen.add(job)
    return out_dir, workers, jobs


def cmd_batch(args) -> int:
    out_dir, workers, jobs = _parse_manifest(Path(args.manifest))
    out_dir = Path(args.out) if args.out else (out_dir or Path("."))
    workers = args.workers or workers
    configs = []
    for config_path, seed in jobs:
        config = load_run_config(config_path)
        config.seed = seed
        configs.append((config_path.stem, config))
    records = []
    failures = 0
    results = experiment.run_many(
        [c for _, c in configs], workers, tolerate_failures=True
    )
    for (stem, config), record in zip(configs, results):
        if isinstance(record, Exception):
            failures += 1
            print(f"run {stem} seed {config.seed} failed: {record}", file=sys.stderr)
            continue
        _write_run_outputs(record, out_dir, f"{stem}_seed{config.seed}")
        records.append((stem, record))
    _write_batch_aggregates(records, out_dir)
    print(f"batch: {len(records)} runs completed, {failures} failed")
    return 0 if failures == 0 else 1


def _write_batch_aggregates(records, out_dir: Path) -> None:
    groups: dict[tuple[str, str], list] = {}
    for stem, record in records:
        key = (Path(record.config.maze).stem, record.config.strategy.kind)
        groups.setdefault(key, []).append(record)
    for (maze_stem, kind), group in sorted(groups.items()):
        tag = f"{maze_stem}_{kind}"
        evaluations, mean, ci = experiment.efficiency_curve(group)
        experiment.write_curve_csv(
            out_dir / f"efficiency_{tag}.csv",
            {"evaluations": evaluations, "mean_max_fitness": mean, "ci95": ci},
        )
        ev, count = experiment.robustness_curve(group)
        experiment.write_curve_csv(
            out_dir / f"robustness_{tag}.csv",
            {"evaluations": ev, "successes": count},
        )
        maze = resolve_maze(group[0].config.maze)
        behaviours = np.concatenate([r.all_behaviours() for r in group])
        heatmap = experiment.heatmap_entropy(
            behaviours, maze, group[0].config.heatmap_cell_size
        )
        (out_dir / f"heatmap_{tag}.txt").write_text(experiment.heatmap_text(heatmap))
        (out_dir / f"heatmap_{tag}.pgm").write_text(experiment.heatmap_pgm(heatmap))
        (out_dir / f"entropy_{tag}.txt").write_text(
            experiment.REAL_FMT.format(heatmap.entropy) + "\n"
        )


def cmd_generate(args) -> int:
    if args.count < 1:
        return _fail("count must be >= 1")
    config = GeneratorConfig(seed=args.seed if args.seed is not None else 0)
    if args.config:
        pairs = parse_flat(Path(args.config).read_text())
        for key, value in pairs.items():
            name = key.split(".")[-1]
            if not hasattr(config, name):
                raise ConfigError(f"unknown generator key {key!r}")
            setattr(config, name, type(getattr(config, name))(value))
    config.validate()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_lines = ["# generated maze benchmark manifest"]
    for i in range(args.count):
        seed = config.seed + i
        rng = np.random.Generator(np.random.Philox(seed))
        maze = mazegen.generate(replace(config, seed=seed), rng)
        name = f"maze_{i:03d}.txt"
        (out_dir / name).write_text(dump_maze(maze))
        manifest_lines.append(f"maze {name} {seed}")
    (out_dir / "manifest.txt").write_text("\n".join(manifest_lines) + "\n")
    print(f"generated {args.count} solvable mazes in {out_dir}")
    return 0


def _parse_grid(spec: str) -> list[dict]:
    """Grid spec: ';'-separated dims, each ``name=lo:hi:step`` or ``name=a,b``."""
    dims = []
    for dim in spec.split(";"):
        name, _, values = dim.partition("=")
        name = name.strip()
        if not values:
            raise ConfigError(f"bad grid dimension {dim!r}")
        if ":" in values:
            parts = values.split(":")
            if len(parts) != 3:
                raise ConfigError(f"bad grid range {values!r} (want lo:hi:step)")
            lo, hi, step = (int(p) for p in parts)
            if step < 1 or hi < lo:
                raise ConfigError(f"bad grid range {values!r}")
            points = list(range(lo, hi + 1, step))
        else:
            points = [int(v) for v in values.split(",")]
        dims.append((name, points))
    if not dims:
        raise ConfigError("empty grid")
    names = [name for name, _ in dims]
    return [
        dict(zip(names, combo))
        for combo in itertools.product(*(points for _, points in dims))
    ]


def cmd_sensitivity(args) -> int:
    if args.runs < 1:
        return _fail("runs must be >= 1")
    config = _load_config(args)
    grid = _parse_grid(args.grid)
    result = experiment.sensitivity_sweep(config, grid, args.runs, args.workers or 1)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["params,successes,mean_evaluations"]
    for row in result.rows:
        params = " ".join(f"{k}={v}" for k, v in row.params.items())
        mean = (
            experiment.REAL_FMT.format(row.mean_evaluations)
            if row.mean_evaluations is not None
            else ""
        )
        lines.append(f"{params},{row.successes},{mean}")
    (out_dir / "sensitivity.csv").write_text("\n".join(lines) + "\n")
    chosen = " ".join(f"{k}={v}" for k, v in result.selected.params.items())
    print(f"selected: {chosen} ({result.selected.successes} successes)")
    return 0


def _parse_maze_manifest(path: Path) -> list[Path]:
    if not path.is_file():
        raise ConfigError(f"maze manifest not found: {path}")
    files = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "maze" or len(parts) != 3:
            raise ConfigError(f"bad maze manifest line: {raw!r}")
        files.append(path.parent / parts[1])
    if not files:
        raise ConfigError("maze manifest lists no mazes")
    return files


def cmd_bench_generated(args) -> int:
    maze_files = _parse_maze_manifest(Path(args.manifest))
    config = _load_config(args)
    kinds = args.strategies or ["surprise", "novelty"]
    strategies = []
    for kind in kinds:
        strategy = replace(config.strategy, kind=kind)
        if kind == "novelty":
            strategy = replace(strategy, n_nearest=args.novelty_nearest)
        strategies.append(strategy)
    result = experiment.generated_benchmark(
        maze_files, strategies, args.runs, config, args.workers or 1
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["maze," + ",".join(result.strategies)]
    for m, maze_file in enumerate(result.maze_files):
        lines.append(
            Path(maze_file).stem + "," + ",".join(str(v) for v in result.successes[m])
        )
    (out_dir / "successes.csv").write_text("\n".join(lines) + "\n")
    rows, cols = result.totals()
    lines = ["strategy," + ",".join(result.strategies) + ",total"]
    for a, kind in enumerate(result.strategies):
        cells = ",".join(experiment.REAL_FMT.format(v) for v in result.greater_pct[a])
        lines.append(f"{kind},{cells},{experiment.REAL_FMT.format(rows[a])}")
    lines.append(
        "total," + ",".join(experiment.REAL_FMT.format(v) for v in cols) + ","
    )
    (out_dir / "greater_matrix.csv").write_text("\n".join(lines) + "\n")
    for kind, records in result.records.items():
        ev, count = experiment.robustness_curve(records)
        experiment.write_curve_csv(
            out_dir / f"robustness_{kind}.csv", {"evaluations": ev, "successes": count}
        )
    print(f"benchmark over {len(maze_files)} mazes written to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mazevolve",
        description="Divergent neuroevolution experiments on deceptive mazes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="results")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--maze", default=None, help="maze file or bundled name")
        p.add_argument("--strategy", default=None, choices=StrategyConfig.KINDS)

    p_run = sub.add_parser("run", help="one evolutionary run")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="all runs of a manifest")
    p_batch.add_argument("manifest")
    p_batch.add_argument("--out", default=None)
    p_batch.add_argument("--workers", type=int, default=None)
    p_batch.set_defaults(func=cmd_batch)

    p_gen = sub.add_parser("generate", help="random solvable benchmark mazes")
    p_gen.add_argument("--config", default=None, help="generator key=value file")
    p_gen.add_argument("--count", type=int, default=60)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", default="generated")
    p_gen.set_defaults(func=cmd_generate)

    p_sens = sub.add_parser("sensitivity", help="parameter sweep on one maze")
    common(p_sens)
    p_sens.add_argument("--grid", required=True, help="e.g. cluster_count=20:240:20;n_nearest=1,2")
    p_sens.add_argument("--runs", type=int, default=50)
    p_sens.set_defaults(func=cmd_sensitivity)

    p_bench = sub.add_parser("bench-generated", help="cross-method table on generated mazes")
    common(p_bench)
    p_bench.add_argument("--manifest", required=True)
    p_bench.add_argument("--runs", type=int, default=50)
    p_bench.add_argument(
        "--strategies", nargs="*", default=None, choices=StrategyConfig.KINDS
    )
    p_bench.add_argument("--novelty-nearest", type=int, default=15)
    p_bench.set_defaults(func=cmd_bench_generated)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MazeFormatError, ValueError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
