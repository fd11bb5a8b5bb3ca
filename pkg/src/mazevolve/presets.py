"""Per-maze experiment defaults for the bundled tasks.

Budgets and the best-performing strategy parameters per maze, as selected by
sensitivity analysis on each task; generated-maze runs reuse one fixed setup
to test generalization without re-tuning.
"""

from __future__ import annotations

from dataclasses import replace

from .config import RunConfig, StrategyConfig

# maze -> (generations, simulation steps)
BUDGETS = {
    "medium": (300, 400),
    "hard": (300, 400),
    "very_hard": (1000, 500),
    "extremely_hard": (1000, 1000),
    "generated": (600, 200),
}

# maze -> surprise (cluster_count, n_nearest)
SURPRISE_PARAMS = {
    "medium": (200, 1),
    "hard": (100, 1),
    "very_hard": (200, 2),
    "extremely_hard": (220, 2),
    "generated": (200, 2),
}

# maze -> novelty n_nearest
NOVELTY_NEAREST = {
    "medium": 15,
    "hard": 15,
    "very_hard": 15,
    "extremely_hard": 10,
    "generated": 15,
}


def preset_run_config(maze: str, kind: str, seed: int = 0, **overrides) -> RunConfig:
    """RunConfig with the documented defaults for one bundled maze and strategy."""
    if maze not in BUDGETS:
        raise KeyError(f"no presets for maze {maze!r}; known: {sorted(BUDGETS)}")
    generations, steps = BUDGETS[maze]
    cluster_count, n_surprise = SURPRISE_PARAMS[maze]
    n_nearest = NOVELTY_NEAREST[maze] if kind == "novelty" else n_surprise
    strategy = StrategyConfig(kind=kind, n_nearest=n_nearest, cluster_count=cluster_count)
    config = RunConfig(
        maze=maze if maze != "generated" else "",
        strategy=strategy,
        generations=generations,
        steps=steps,
        seed=seed,
    )
    return replace(config, **overrides) if overrides else config
