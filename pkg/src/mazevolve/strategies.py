"""Reward strategies scored over a population's behaviour points.

Six ways to reward a generation of final robot positions: distance to the
goal (objective), distance to nearest neighbours in population and archive
(novelty), distance to predicted behaviours extrapolated from the two prior
generations' behavioural clusters (surprise), plus three baselines (uniform
random scores, surprise against random points, surprise against the current
generation's own centroids).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import StrategyConfig
from .mazesim import MazeSpec

FITNESS_OFFSET = 300.0  # reward ceiling: fitness = 300 - distance(final, goal)


def objective_score(behaviour, goal) -> float:
    """Goal-proximity reward, clamped to stay non-negative."""
    d = float(np.hypot(behaviour[0] - goal[0], behaviour[1] - goal[1]))
    return max(0.0, FITNESS_OFFSET - d)


def objective_scores(distances: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, FITNESS_OFFSET - distances)


# ---------------------------------------------------------------------------
# novelty


@dataclass
class NoveltyArchive:
    """Append-only store of behaviours that were novel when first seen."""

    points: list[tuple[float, float]] = field(default_factory=list)
    threshold: float = 6.0
    admitted_last: int = 0
    barren_streak: int = 0

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.float64).reshape(len(self.points), 2)


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _mean_nearest(distances: np.ndarray, count: int) -> np.ndarray:
    """Row-wise mean of the ``count`` smallest entries (all, if fewer)."""
    count = min(count, distances.shape[1])
    if count <= 0:
        return np.zeros(distances.shape[0])
    if count == distances.shape[1]:
        return distances.mean(axis=1)
    part = np.partition(distances, count - 1, axis=1)[:, :count]
    return part.mean(axis=1)


def novelty_scores(
    behaviours: np.ndarray, archive: NoveltyArchive, n_nearest: int
) -> np.ndarray:
    """Mean distance to the n nearest behaviours in population and archive."""
    pop = np.asarray(behaviours, dtype=np.float64)
    d_pop = _pairwise_distances(pop, pop)
    np.fill_diagonal(d_pop, np.inf)  # a behaviour is not its own neighbour
    if archive.points:
        d_arc = _pairwise_distances(pop, archive.as_array())
        d_all = np.concatenate([d_pop, d_arc], axis=1)
    else:
        d_all = d_pop
    n_eff = min(n_nearest, len(pop) - 1 + len(archive.points))
    return _mean_nearest(d_all, n_eff)


def novelty_score(
    index: int, behaviours: np.ndarray, archive: NoveltyArchive, n_nearest: int
) -> float:
    return float(novelty_scores(behaviours, archive, n_nearest)[index])


def update_archive(
    archive: NoveltyArchive,
    behaviours: np.ndarray,
    scores: np.ndarray,
    grow_factor: float = 1.2,
    shrink_factor: float = 0.9,
    grow_above: int = 4,
    shrink_after: int = 10,
) -> NoveltyArchive:
    """Admit every behaviour scoring above the threshold; adapt the threshold.

    More than ``grow_above`` admissions in one generation raises the threshold
    by ``grow_factor``; ``shrink_after`` consecutive barren generations lowers
    it by ``shrink_factor``.
    """
    admitted = [
        (float(b[0]), float(b[1]))
        for b, s in zip(behaviours, scores)
        if s > archive.threshold
    ]
    threshold = archive.threshold
    barren = archive.barren_streak
    if len(admitted) > grow_above:
        threshold *= grow_factor
    if admitted:
        barren = 0
    else:
        barren += 1
        if barren >= shrink_after:
            threshold *= shrink_factor
            barren = 0
    return NoveltyArchive(
        points=archive.points + admitted,
        threshold=threshold,
        admitted_last=len(admitted),
        barren_streak=barren,
    )


# ---------------------------------------------------------------------------
# behavioural clustering and prediction


@dataclass
class ClusterModel:
    """Centroids of one generation's behaviours, paired to the previous
    generation's clusters through seeding."""

    centroids: np.ndarray
    stale: np.ndarray               # true where no behaviour joined this generation
    assignments: np.ndarray
    last_updated: np.ndarray        # generation index per centroid

    @property
    def cluster_count(self) -> int:
        return len(self.centroids)


@dataclass
class PredictionSet:
    """Expected behaviour points for the coming generation."""

    points: np.ndarray
    stale: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def _kmeans_pp_seeds(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    seeds = np.empty((k, 2))
    pick = int(rng.integers(len(points)))
    seeds[0] = points[pick]
    d2 = np.sum((points - seeds[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            pick = int(rng.integers(len(points)))
        else:
            r = rng.random() * total
            pick = min(int(np.searchsorted(np.cumsum(d2), r, side="right")), len(points) - 1)
        seeds[j] = points[pick]
        np.minimum(d2, np.sum((points - seeds[j]) ** 2, axis=1), out=d2)
    return seeds


def cluster_population(
    behaviours: np.ndarray,
    cluster_count: int,
    previous: ClusterModel | None,
    rng: np.random.Generator,
    generation: int = 0,
    max_iterations: int = 100,
) -> ClusterModel:
    """Lloyd's iterations seeded by the previous generation's centroids.

    The first generation seeds with k-means++ instead. Clusters that receive
    no behaviours keep their seed centroid and are flagged stale, so their
    position survives until behaviours return near it.
    """
    points = np.asarray(behaviours, dtype=np.float64)
    if not 1 <= cluster_count <= len(points):
        raise ValueError("cluster count must lie in [1, population size]")
    if previous is None:
        centroids = _kmeans_pp_seeds(points, cluster_count, rng)
        last_updated = np.full(cluster_count, generation, dtype=np.int64)
    else:
        if previous.cluster_count != cluster_count:
            raise ValueError("cluster count is fixed across generations")
        centroids = previous.centroids.copy()
        last_updated = previous.last_updated.copy()
    assignments = None
    for _ in range(max_iterations):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assignments = np.argmin(d2, axis=1)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(cluster_count):
            members = points[assignments == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
    stale = np.array([not np.any(assignments == j) for j in range(cluster_count)])
    last_updated[~stale] = generation
    return ClusterModel(centroids, stale, assignments, last_updated)


def predict(
    older: ClusterModel,
    newer: ClusterModel,
    previous: PredictionSet | None = None,
) -> PredictionSet:
    """Linear projection of paired centroids one generation ahead.

    Componentwise each prediction is ``2 * newer - older``; clusters that
    were empty in the newest generation keep their previous prediction
    unchanged.
    """
    if older.cluster_count != newer.cluster_count:
        raise ValueError("cluster models must share their cluster count")
    points = 2.0 * newer.centroids - older.centroids
    stale = newer.stale.copy()
    if previous is not None:
        points[stale] = previous.points[stale]
    return PredictionSet(points, stale)


def surprise_scores(
    behaviours: np.ndarray, predictions: PredictionSet, n_nearest: int
) -> np.ndarray:
    """Mean distance from each behaviour to its n nearest predicted points."""
    if len(predictions) == 0:
        raise ValueError("prediction set is empty")
    if n_nearest > len(predictions):
        raise ValueError("n_nearest cannot exceed the prediction count")
    d = _pairwise_distances(np.asarray(behaviours, dtype=np.float64), predictions.points)
    return _mean_nearest(d, n_nearest)


def surprise_score(behaviour, predictions: PredictionSet, n_nearest: int) -> float:
    b = np.asarray(behaviour, dtype=np.float64).reshape(1, 2)
    return float(surprise_scores(b, predictions, n_nearest)[0])


def baseline_scores(
    kind: str,
    behaviours: np.ndarray,
    maze: MazeSpec,
    rng: np.random.Generator,
    cluster_count: int,
    n_nearest: int,
    previous: ClusterModel | None = None,
    generation: int = 0,
) -> np.ndarray:
    """Scores for the three control strategies.

    random: i.i.d. uniform rewards. surprise-random: deviation from freshly
    resampled uniform points in the maze bounding box. surprise-no-prediction:
    deviation from the current generation's own cluster centroids.
    """
    behaviours = np.asarray(behaviours, dtype=np.float64)
    if kind == "random":
        return rng.random(len(behaviours))
    if kind == "surprise-random":
        points = rng.random((cluster_count, 2)) * np.array([maze.width, maze.height])
        fake = PredictionSet(points, np.zeros(cluster_count, dtype=bool))
        return surprise_scores(behaviours, fake, n_nearest)
    if kind == "surprise-no-prediction":
        model = cluster_population(behaviours, cluster_count, previous, rng, generation)
        own = PredictionSet(model.centroids, model.stale)
        return surprise_scores(behaviours, own, n_nearest)
    raise ValueError(f"unknown baseline kind {kind!r}")


# ---------------------------------------------------------------------------
# stateful per-run strategies


class Strategy:
    """Scores one generation of behaviours; owns any cross-generation state."""

    def scores(self, behaviours: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class ObjectiveStrategy(Strategy):
    def __init__(self, goal):
        self.goal = np.asarray(goal, dtype=np.float64)

    def scores(self, behaviours, rng):
        d = np.sqrt(np.sum((np.asarray(behaviours) - self.goal) ** 2, axis=1))
        return objective_scores(d)


class NoveltyStrategy(Strategy):
    def __init__(self, n_nearest: int, initial_threshold: float):
        self.n_nearest = n_nearest
        self.archive = NoveltyArchive(threshold=initial_threshold)

    def scores(self, behaviours, rng):
        s = novelty_scores(behaviours, self.archive, self.n_nearest)
        self.archive = update_archive(self.archive, behaviours, s)
        return s


class RandomStrategy(Strategy):
    def scores(self, behaviours, rng):
        return rng.random(len(behaviours))


class SurpriseStrategy(Strategy):
    """Prediction-deviation rewards; random through the first two generations."""

    def __init__(self, cluster_count: int, n_nearest: int):
        self.cluster_count = cluster_count
        self.n_nearest = n_nearest
        self.generation = 0
        self.older: ClusterModel | None = None
        self.newer: ClusterModel | None = None
        self.predictions: PredictionSet | None = None

    def scores(self, behaviours, rng):
        self.generation += 1
        if self.generation >= 3:
            self.predictions = predict(self.older, self.newer, self.predictions)
            s = surprise_scores(behaviours, self.predictions, self.n_nearest)
        else:
            s = rng.random(len(behaviours))
        model = cluster_population(
            behaviours, self.cluster_count, self.newer, rng, self.generation
        )
        self.older, self.newer = self.newer, model
        return s


class SurpriseRandomStrategy(Strategy):
    def __init__(self, cluster_count: int, n_nearest: int, maze: MazeSpec):
        self.cluster_count = cluster_count
        self.n_nearest = n_nearest
        self.maze = maze
        self.generation = 0

    def scores(self, behaviours, rng):
        self.generation += 1
        if self.generation < 3:
            return rng.random(len(behaviours))
        return baseline_scores(
            "surprise-random", behaviours, self.maze, rng, self.cluster_count, self.n_nearest
        )


class SurpriseNoPredictionStrategy(Strategy):
    def __init__(self, cluster_count: int, n_nearest: int, maze: MazeSpec):
        self.cluster_count = cluster_count
        self.n_nearest = n_nearest
        self.maze = maze
        self.generation = 0
        self.model: ClusterModel | None = None

    def scores(self, behaviours, rng):
        self.generation += 1
        early = rng.random(len(behaviours)) if self.generation < 3 else None
        self.model = cluster_population(
            behaviours, self.cluster_count, self.model, rng, self.generation
        )
        if early is not None:
            return early
        own = PredictionSet(self.model.centroids, self.model.stale)
        return surprise_scores(behaviours, own, self.n_nearest)


def make_strategy(config: StrategyConfig, maze: MazeSpec, population: int) -> Strategy:
    """Build the per-run strategy object for a validated config."""
    config.validate(population)
    if config.kind == "objective":
        return ObjectiveStrategy(maze.goal)
    if config.kind == "novelty":
        return NoveltyStrategy(config.n_nearest, config.novelty_threshold_initial)
    if config.kind == "random":
        return RandomStrategy()
    if config.kind == "surprise":
        return SurpriseStrategy(config.cluster_count, config.n_nearest)
    if config.kind == "surprise-random":
        return SurpriseRandomStrategy(config.cluster_count, config.n_nearest, maze)
    return SurpriseNoPredictionStrategy(config.cluster_count, config.n_nearest, maze)
