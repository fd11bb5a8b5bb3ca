"""Dataclass configs and the flat ``section.key = value`` config file format.

Every tunable constant of the toolkit lives here with its documented default,
so experiment configs are auditable line by line and any value can be
overridden from a plain text file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Unusable configuration: unknown key, bad value, missing file."""


@dataclass
class NeatConfig:
    """Parameters of the neuroevolution substrate."""

    c1_excess: float = 1.0
    c2_disjoint: float = 1.0
    c3_weight: float = 3.0
    normalize_threshold: int = 20      # gene count below which distance is unnormalized
    compat_threshold: float = 6.0
    compat_threshold_step: float = 0.3
    target_species: int = 10
    weight_mutate_prob: float = 0.8    # per offspring
    weight_perturb_power: float = 0.5
    weight_replace_prob: float = 0.1   # per connection, within a weight mutation
    weight_cap: float = 8.0
    add_connection_prob: float = 0.10
    add_node_prob: float = 0.03
    crossover_prob: float = 0.75
    interspecies_mating_prob: float = 0.001
    disabled_inherit_prob: float = 0.75
    survival_fraction: float = 0.2     # top share of a species eligible as parents
    elitism: int = 1                   # copied unchanged per species
    stagnation: int = 15               # generations without improvement before culling
    sigmoid_slope: float = 4.9

    def validate(self) -> None:
        if min(self.c1_excess, self.c2_disjoint, self.c3_weight) < 0:
            raise ConfigError("compatibility coefficients must be >= 0")
        if self.compat_threshold <= 0:
            raise ConfigError("neat.compat_threshold must be > 0")


@dataclass
class SimConfig:
    """Robot and physics constants for the maze simulation."""

    robot_radius: float = 8.0
    rangefinder_range: float = 100.0
    max_linear_velocity: float = 3.0
    max_angular_velocity: float = 1.0  # rad/step
    linear_scale: float = 0.25         # velocity change per step at full actuation
    angular_scale: float = 0.4244      # rad
    success_radius: float = 5.0

    def validate(self) -> None:
        if self.robot_radius <= 0 or self.rangefinder_range <= 0:
            raise ConfigError("sim.robot_radius and sim.rangefinder_range must be > 0")
        if self.max_linear_velocity >= self.robot_radius:
            # faster than this and a robot could tunnel through a wall in one step
            raise ConfigError("sim.max_linear_velocity must stay below sim.robot_radius")


@dataclass
class StrategyConfig:
    """Which reward strategy scores the population, and its knobs."""

    kind: str = "objective"
    n_nearest: int = 15                # neighbours/predictions averaged in a score
    cluster_count: int = 200           # behavioural clusters driving predictions
    history_depth: int = 2             # generations feeding the predictive model
    novelty_threshold_initial: float = 6.0

    KINDS = (
        "objective",
        "novelty",
        "surprise",
        "random",
        "surprise-random",
        "surprise-no-prediction",
    )

    def validate(self, population: int | None = None) -> None:
        if self.kind not in self.KINDS:
            raise ConfigError(f"strategy.kind must be one of {self.KINDS}, got {self.kind!r}")
        if self.n_nearest < 1:
            raise ConfigError("strategy.n_nearest must be >= 1")
        if self.history_depth != 2:
            raise ConfigError("strategy.history_depth is fixed at 2")
        if self.kind in ("surprise", "surprise-random", "surprise-no-prediction"):
            if self.n_nearest > self.cluster_count:
                raise ConfigError("strategy.n_nearest must be <= strategy.cluster_count")
            if population is not None and self.cluster_count > population:
                raise ConfigError("strategy.cluster_count must be <= population size")
        if self.novelty_threshold_initial <= 0:
            raise ConfigError("strategy.novelty_threshold_initial must be > 0")


@dataclass
class GeneratorConfig:
    """Recursive-division maze generator parameters."""

    width: float = 200.0
    height: float = 200.0
    subdivisions_min: int = 2
    subdivisions_max: int = 6
    corridor_min: float = 40.0
    hole_width: float = 30.0
    start_inset: float = 20.0
    verify_cell_size: float = 10.0
    seed: int = 0

    def validate(self, robot_radius: float = 8.0) -> None:
        if not (0 <= self.subdivisions_min <= self.subdivisions_max <= 20):
            raise ConfigError("generator subdivision range must lie within [0, 20]")
        if self.corridor_min <= 2 * robot_radius:
            raise ConfigError("generator.corridor_min must exceed the robot diameter")
        if self.hole_width >= self.corridor_min:
            raise ConfigError("generator.hole_width must be below generator.corridor_min")
        if self.verify_cell_size > self.hole_width / 2:
            raise ConfigError("generator.verify_cell_size must be <= hole_width / 2")


@dataclass
class RunConfig:
    """One evolutionary run: maze, strategy, budgets, seed."""

    maze: str = ""                     # path to a maze file, or a bundled maze name
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    neat: NeatConfig = field(default_factory=NeatConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    population: int = 250
    generations: int = 300
    steps: int = 400
    seed: int = 0
    heatmap_cell_size: float = 5.0
    stop_on_success: bool = False
    dump_behaviours: bool = False

    def validate(self) -> None:
        if self.population < 2:
            raise ConfigError("experiment.population must be >= 2")
        if self.generations < 1 or self.steps < 1:
            raise ConfigError("experiment budgets must be >= 1")
        self.neat.validate()
        self.sim.validate()
        self.strategy.validate(self.population)


# which config file section maps to which nested dataclass; experiment.* keys
# land on RunConfig itself.
_SECTIONS = {"neat": "neat", "sim": "sim", "strategy": "strategy"}


def _coerce(raw: str, typ, key: str):
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def parse_flat(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def apply_keys(config: RunConfig, pairs: dict[str, str]) -> RunConfig:
    """Apply flat dotted keys onto a RunConfig, with type coercion."""
    for key, raw in pairs.items():
        section, _, name = key.partition(".")
        if not name:  # bare key: treat as experiment section
            section, name = "experiment", section
        if section == "experiment":
            target = config
        elif section in _SECTIONS:
            target = getattr(config, _SECTIONS[section])
        else:
            raise ConfigError(f"unknown config section in key {key!r}")
        fnames = {f.name for f in dataclasses.fields(target)}
        if name not in fnames or dataclasses.is_dataclass(getattr(target, name)):
            raise ConfigError(f"unknown config key {key!r}")
        typ = type(getattr(target, name))
        setattr(target, name, _coerce(raw, typ, key))
    return config


def load_run_config(path: str | Path, overrides: dict[str, str] | None = None) -> RunConfig:
    """Load a RunConfig from a flat config file, then apply overrides."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    config = apply_keys(RunConfig(), parse_flat(p.read_text()))
    if overrides:
        apply_keys(config, overrides)
    config.validate()
    return config


def dump_run_config(config: RunConfig) -> str:
    """Render a RunConfig back to the flat file format (sorted keys)."""
    lines = []
    for section, target in (
        ("experiment", config),
        ("neat", config.neat),
        ("sim", config.sim),
        ("strategy", config.strategy),
    ):
        for f in dataclasses.fields(target):
            value = getattr(target, f.name)
            if dataclasses.is_dataclass(value):
                continue
            lines.append(f"{section}.{f.name} = {value}")
    return "\n".join(lines) + "\n"
