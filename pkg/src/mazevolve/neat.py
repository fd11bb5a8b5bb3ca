"""Minimal NEAT engine: genome encoding, activation, speciation, reproduction.

Reward scores are supplied externally by a strategy; this module only owns the
genetic substrate. Genomes and populations are immutable values; all variation
happens through ``reproduce`` which builds the next generation from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import activation_passes
from .config import ConfigError, NeatConfig

BIAS = "bias"
INPUT = "input"
OUTPUT = "output"
HIDDEN = "hidden"

N_INPUTS = 10
N_OUTPUTS = 2


@dataclass(frozen=True)
class NodeGene:
    id: int
    role: str


@dataclass(frozen=True)
class ConnGene:
    innovation: int
    src: int
    dst: int
    weight: float
    enabled: bool


@dataclass(frozen=True)
class Genome:
    """Network encoding: nodes plus innovation-numbered connections.

    Connections are kept sorted by strictly increasing innovation number.
    """

    nodes: tuple[NodeGene, ...]
    connections: tuple[ConnGene, ...]

    def node_count(self) -> int:
        return len(self.nodes)

    def hidden_count(self) -> int:
        return sum(1 for n in self.nodes if n.role == HIDDEN)

    def max_innovation(self) -> int:
        return self.connections[-1].innovation if self.connections else -1


@dataclass
class Species:
    sid: int
    representative: Genome
    members: list[int]
    staleness: int = 0
    best_score: float = -math.inf


@dataclass
class Population:
    members: tuple[Genome, ...]
    species: list[Species]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class GenomicMetrics:
    """Complexity (per member) and diversity (per unordered pair) averages."""

    mean_connections: float
    mean_hidden_nodes: float
    mean_compatibility: float
    mean_disjoint: float
    mean_weight_difference: float
    mean_excess: float


class Innovations:
    """Shared innovation-number and node-id source for one evolutionary run.

    Structural mutations are deduplicated within a generation: the same new
    connection or node split receives the same numbers everywhere, while the
    caches reset at each ``begin_generation`` so later re-creations of the
    same structure in other generations get fresh numbers.
    """

    def __init__(self, next_innovation: int, next_node: int):
        self.next_innovation = next_innovation
        self.next_node = next_node
        self._conn_cache: dict[tuple[int, int], int] = {}
        self._split_cache: dict[int, tuple[int, int, int]] = {}

    def begin_generation(self) -> None:
        self._conn_cache.clear()
        self._split_cache.clear()

    def connection(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self._conn_cache:
            self._conn_cache[key] = self.next_innovation
            self.next_innovation += 1
        return self._conn_cache[key]

    def node_split(self, conn_innovation: int) -> tuple[int, int, int]:
        if conn_innovation not in self._split_cache:
            node_id = self.next_node
            self.next_node += 1
            first = self.next_innovation
            self.next_innovation += 2
            self._split_cache[conn_innovation] = (node_id, first, first + 1)
        return self._split_cache[conn_innovation]


def io_nodes(n_inputs: int = N_INPUTS, n_outputs: int = N_OUTPUTS) -> tuple[NodeGene, ...]:
    nodes = [NodeGene(0, BIAS)]
    nodes += [NodeGene(1 + i, INPUT) for i in range(n_inputs)]
    nodes += [NodeGene(1 + n_inputs + o, OUTPUT) for o in range(n_outputs)]
    return tuple(nodes)


def validate_genome(genome: Genome, n_inputs: int = N_INPUTS, n_outputs: int = N_OUTPUTS) -> None:
    """Raise ValueError if the genome breaks a structural invariant."""
    roles = {}
    for n in genome.nodes:
        if n.id in roles:
            raise ValueError(f"duplicate node id {n.id}")
        roles[n.id] = n.role
    counts = {BIAS: 0, INPUT: 0, OUTPUT: 0, HIDDEN: 0}
    for n in genome.nodes:
        counts[n.role] += 1
    if counts[BIAS] != 1 or counts[INPUT] != n_inputs or counts[OUTPUT] != n_outputs:
        raise ValueError(
            f"expected {n_inputs} inputs, 1 bias, {n_outputs} outputs; got {counts}"
        )
    last = -1
    for c in genome.connections:
        if c.innovation <= last:
            raise ValueError("innovation numbers must be strictly increasing")
        last = c.innovation
        if c.src not in roles or c.dst not in roles:
            raise ValueError(f"connection {c.innovation} references a missing node")


def init_population(
    io_spec: tuple[int, int], size: int, rng: np.random.Generator
) -> tuple[Population, Innovations]:
    """Fully-connected minimal genomes with uniform random weights in [-1, 1]."""
    if size < 2:
        raise ConfigError("population size must be >= 2")
    n_inputs, n_outputs = io_spec
    nodes = io_nodes(n_inputs, n_outputs)
    sources = list(range(0, 1 + n_inputs))
    outputs = list(range(1 + n_inputs, 1 + n_inputs + n_outputs))
    members = []
    for _ in range(size):
        conns = []
        innovation = 0
        for s in sources:
            for o in outputs:
                conns.append(ConnGene(innovation, s, o, float(rng.uniform(-1.0, 1.0)), True))
                innovation += 1
        members.append(Genome(nodes, tuple(conns)))
    innovations = Innovations(
        next_innovation=len(sources) * len(outputs), next_node=1 + n_inputs + n_outputs
    )
    population = Population(tuple(members), [])
    population.species = speciate(population.members, math.inf, NeatConfig())
    return population, innovations


# ---------------------------------------------------------------------------
# activation


def _local_index(genome: Genome, n_inputs: int, n_outputs: int) -> dict[int, int]:
    """Map node ids to kernel slots: bias, inputs, outputs, then hidden."""
    idx = {}
    n_in = 0
    n_out = 0
    hidden = 1 + n_inputs + n_outputs
    for n in genome.nodes:
        if n.role == BIAS:
            idx[n.id] = 0
        elif n.role == INPUT:
            n_in += 1
            idx[n.id] = n_in
        elif n.role == OUTPUT:
            idx[n.id] = 1 + n_inputs + n_out
            n_out += 1
        else:
            idx[n.id] = hidden
            hidden += 1
    return idx


def flatten_genome(
    genome: Genome, n_inputs: int = N_INPUTS, n_outputs: int = N_OUTPUTS
) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Enabled connections as (node count, src, dst, weight) kernel arrays."""
    idx = _local_index(genome, n_inputs, n_outputs)
    enabled = [c for c in genome.connections if c.enabled]
    src = np.fromiter((idx[c.src] for c in enabled), dtype=np.int64, count=len(enabled))
    dst = np.fromiter((idx[c.dst] for c in enabled), dtype=np.int64, count=len(enabled))
    w = np.fromiter((c.weight for c in enabled), dtype=np.float64, count=len(enabled))
    return genome.node_count(), src, dst, w


def activate(
    genome: Genome, inputs, slope: float = 4.9
) -> tuple[float, float]:
    """Network outputs for one sensor vector; both lie in (0, 1).

    The network relaxes with one synchronous pass per node, so cycles are
    evaluated by bounded iteration rather than topological order.
    """
    n_nodes, src, dst, w = flatten_genome(genome)
    n_fixed = 1 + N_INPUTS
    vals = np.zeros(n_nodes)
    acc = np.zeros(n_nodes)
    vals[0] = 1.0
    for i, x in enumerate(inputs):
        vals[1 + i] = x
    activation_passes(src, dst, w, n_nodes, n_fixed, slope, vals, acc)
    return float(vals[n_fixed]), float(vals[n_fixed + 1])


# ---------------------------------------------------------------------------
# compatibility distance


def _gene_arrays(genome: Genome) -> tuple[np.ndarray, np.ndarray]:
    n = len(genome.connections)
    inn = np.fromiter((c.innovation for c in genome.connections), dtype=np.int64, count=n)
    w = np.fromiter((c.weight for c in genome.connections), dtype=np.float64, count=n)
    return inn, w


def _distance_parts(
    inn1: np.ndarray, w1: np.ndarray, inn2: np.ndarray, w2: np.ndarray
) -> tuple[int, int, float]:
    """(excess, disjoint, mean |weight difference| over matching genes)."""
    if inn1.size == 0 or inn2.size == 0:
        return inn1.size + inn2.size, 0, 0.0
    common, i1, i2 = np.intersect1d(inn1, inn2, assume_unique=True, return_indices=True)
    excess = int(np.sum(inn1 > inn2[-1]) + np.sum(inn2 > inn1[-1]))
    disjoint = int(inn1.size + inn2.size - 2 * common.size - excess)
    wbar = float(np.mean(np.abs(w1[i1] - w2[i2]))) if common.size else 0.0
    return excess, disjoint, wbar


def compatibility_distance(g1: Genome, g2: Genome, coeffs: NeatConfig) -> float:
    """Linear combination of excess genes, disjoint genes and weight difference."""
    inn1, w1 = _gene_arrays(g1)
    inn2, w2 = _gene_arrays(g2)
    return _distance_from_arrays(inn1, w1, inn2, w2, coeffs)


def _distance_from_arrays(inn1, w1, inn2, w2, coeffs: NeatConfig) -> float:
    excess, disjoint, wbar = _distance_parts(inn1, w1, inn2, w2)
    n = max(inn1.size, inn2.size)
    if inn1.size < coeffs.normalize_threshold and inn2.size < coeffs.normalize_threshold:
        n = 1
    n = max(n, 1)
    return coeffs.c1_excess * excess / n + coeffs.c2_disjoint * disjoint / n + coeffs.c3_weight * wbar


# ---------------------------------------------------------------------------
# speciation


def speciate(
    members: tuple[Genome, ...],
    threshold: float,
    coeffs: NeatConfig,
    previous_species: list[Species] | None = None,
    next_sid: int = 1,
) -> list[Species]:
    """Assign every genome to the first species whose representative is close.

    Representatives come from the previous generation's species; genomes not
    within ``threshold`` of any representative found a new species.
    """
    species: list[Species] = []
    for prev in previous_species or []:
        species.append(
            Species(prev.sid, prev.representative, [], prev.staleness, prev.best_score)
        )
        next_sid = max(next_sid, prev.sid + 1)
    arrays = [_gene_arrays(g) for g in members]
    rep_arrays = [_gene_arrays(s.representative) for s in species]
    for i, genome in enumerate(members):
        inn, w = arrays[i]
        placed = False
        for s, (rinn, rw) in zip(species, rep_arrays):
            if _distance_from_arrays(inn, w, rinn, rw, coeffs) < threshold:
                s.members.append(i)
                placed = True
                break
        if not placed:
            created = Species(next_sid, genome, [i])
            next_sid += 1
            species.append(created)
            rep_arrays.append(arrays[i])
    return [s for s in species if s.members]


# ---------------------------------------------------------------------------
# reproduction


def _crossover(
    fit: Genome, other: Genome, rng: np.random.Generator, config: NeatConfig
) -> Genome:
    """Offspring aligned by innovation number; structure follows the fitter parent."""
    other_by_inn = {c.innovation: c for c in other.connections}
    child_conns = []
    for gene in fit.connections:
        mate = other_by_inn.get(gene.innovation)
        if mate is not None:
            chosen = gene if rng.random() < 0.5 else mate
            enabled = chosen.enabled
            if not gene.enabled or not mate.enabled:
                enabled = rng.random() >= config.disabled_inherit_prob
            child_conns.append(
                ConnGene(gene.innovation, gene.src, gene.dst, chosen.weight, enabled)
            )
        else:
            child_conns.append(gene)
    node_by_id = {n.id: n for n in fit.nodes}
    for n in other.nodes:
        node_by_id.setdefault(n.id, n)
    used = {c.src for c in child_conns} | {c.dst for c in child_conns}
    nodes = tuple(
        n
        for n in sorted(node_by_id.values(), key=lambda n: n.id)
        if n.role != HIDDEN or n.id in used
    )
    return Genome(nodes, tuple(child_conns))


def _mutate_weights(conns: list[ConnGene], rng: np.random.Generator, config: NeatConfig):
    out = []
    for c in conns:
        if rng.random() < config.weight_replace_prob:
            w = float(rng.uniform(-1.0, 1.0))
        else:
            w = c.weight + float(
                rng.uniform(-config.weight_perturb_power, config.weight_perturb_power)
            )
        w = min(max(w, -config.weight_cap), config.weight_cap)
        out.append(ConnGene(c.innovation, c.src, c.dst, w, c.enabled))
    return out


def _insert_sorted(conns: list[ConnGene], gene: ConnGene) -> None:
    lo = 0
    for lo in range(len(conns) + 1):
        if lo == len(conns) or conns[lo].innovation > gene.innovation:
            break
    conns.insert(lo, gene)


def _mutate_structure(
    nodes: list[NodeGene],
    conns: list[ConnGene],
    rng: np.random.Generator,
    config: NeatConfig,
    innovations: Innovations,
) -> None:
    if rng.random() < config.add_node_prob:
        enabled = [i for i, c in enumerate(conns) if c.enabled]
        if enabled:
            pick = enabled[int(rng.integers(len(enabled)))]
            old = conns[pick]
            conns[pick] = ConnGene(old.innovation, old.src, old.dst, old.weight, False)
            node_id, inn_in, inn_out = innovations.node_split(old.innovation)
            nodes.append(NodeGene(node_id, HIDDEN))
            _insert_sorted(conns, ConnGene(inn_in, old.src, node_id, 1.0, True))
            _insert_sorted(conns, ConnGene(inn_out, node_id, old.dst, old.weight, True))
    if rng.random() < config.add_connection_prob:
        existing = {(c.src, c.dst) for c in conns}
        targets = [n.id for n in nodes if n.role in (OUTPUT, HIDDEN)]
        ids = [n.id for n in nodes]
        for _ in range(20):
            src = ids[int(rng.integers(len(ids)))]
            dst = targets[int(rng.integers(len(targets)))]
            if (src, dst) in existing:
                continue
            inn = innovations.connection(src, dst)
            _insert_sorted(conns, ConnGene(inn, src, dst, float(rng.uniform(-1.0, 1.0)), True))
            break


def _mutate(
    genome: Genome, rng: np.random.Generator, config: NeatConfig, innovations: Innovations
) -> Genome:
    conns = list(genome.connections)
    nodes = list(genome.nodes)
    if rng.random() < config.weight_mutate_prob:
        conns = _mutate_weights(conns, rng, config)
    _mutate_structure(nodes, conns, rng, config, innovations)
    return Genome(tuple(nodes), tuple(conns))


def _allocate_offspring(weights: list[float], total: int) -> list[int]:
    """Largest-remainder apportionment of ``total`` slots (uniform if all zero)."""
    s = sum(weights)
    if s <= 0.0:
        weights = [1.0] * len(weights)
        s = float(len(weights))
    quotas = [w / s * total for w in weights]
    counts = [int(q) for q in quotas]
    short = total - sum(counts)
    remainders = sorted(
        range(len(quotas)), key=lambda i: (quotas[i] - counts[i], -i), reverse=True
    )
    for i in remainders[:short]:
        counts[i] += 1
    return counts


def reproduce(
    population: Population,
    scores,
    config: NeatConfig,
    rng: np.random.Generator,
    innovations: Innovations,
    threshold: float | None = None,
) -> Population:
    """Build the next generation: sharing, elitism, crossover, mutation.

    Raw scores must be finite and >= 0; explicit fitness sharing divides each
    member's score by its species size, species then receive offspring slots
    in proportion. Stagnant species are culled unless they hold the best
    genome. New structural genes draw innovation numbers from ``innovations``
    with per-generation deduplication.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (population.size,) or not np.all(np.isfinite(scores)):
        raise ValueError("scores must be a finite vector matching the population size")
    if np.any(scores < 0.0):
        raise ValueError("strategy scores must be >= 0")
    if threshold is None:
        threshold = config.compat_threshold
    innovations.begin_generation()

    best_index = int(np.argmax(scores))
    # work on copies so the caller's population stays an immutable value
    species = [
        Species(
            s.sid,
            s.representative,
            sorted(s.members, key=lambda i: (-scores[i], i)),
            s.staleness,
            s.best_score,
        )
        for s in population.species
    ]
    for s in species:
        top = float(scores[s.members[0]])
        if top > s.best_score:
            s.best_score = top
            s.staleness = 0
        else:
            s.staleness += 1

    eligible = [
        s for s in species if s.staleness <= config.stagnation or best_index in s.members
    ]
    shared = [float(np.sum(scores[s.members]) / len(s.members)) for s in eligible]
    counts = _allocate_offspring(shared, population.size)
    # the champion's species always breeds at least once
    champ = next(i for i, s in enumerate(eligible) if best_index in s.members)
    if counts[champ] == 0:
        donor = int(np.argmax(counts))
        counts[donor] -= 1
        counts[champ] += 1

    offspring: list[Genome] = []
    for s, count in zip(eligible, counts):
        if count == 0:
            continue
        survivors = s.members[: max(1, math.ceil(config.survival_fraction * len(s.members)))]
        elites = min(config.elitism, count, len(s.members))
        for e in range(elites):
            offspring.append(population.members[s.members[e]])
        for _ in range(count - elites):
            i1 = survivors[int(rng.integers(len(survivors)))]
            if rng.random() < config.crossover_prob:
                if len(eligible) > 1 and rng.random() < config.interspecies_mating_prob:
                    pool = eligible[int(rng.integers(len(eligible)))]
                    i2 = pool.members[int(rng.integers(len(pool.members)))]
                else:
                    i2 = survivors[int(rng.integers(len(survivors)))]
                if scores[i2] > scores[i1]:
                    i1, i2 = i2, i1
                child = _crossover(
                    population.members[i1], population.members[i2], rng, config
                )
            else:
                child = population.members[i1]
            offspring.append(_mutate(child, rng, config, innovations))

    next_sid = max((s.sid for s in population.species), default=0) + 1
    new_species = speciate(tuple(offspring), threshold, config, eligible, next_sid)
    for s in new_species:
        s.representative = offspring[s.members[int(rng.integers(len(s.members)))]]
    return Population(tuple(offspring), new_species)


# ---------------------------------------------------------------------------
# metrics


def genomic_metrics(members: tuple[Genome, ...], coeffs: NeatConfig) -> GenomicMetrics:
    """Complexity and diversity averages over a population."""
    if len(members) < 2:
        raise ValueError("genomic metrics need at least two genomes")
    conns = float(np.mean([len(g.connections) for g in members]))
    hidden = float(np.mean([g.hidden_count() for g in members]))
    arrays = [_gene_arrays(g) for g in members]
    compat = disjoint = wdiff = excess = 0.0
    pairs = 0
    for i in range(len(members)):
        inn1, w1 = arrays[i]
        for j in range(i + 1, len(members)):
            inn2, w2 = arrays[j]
            e, d, wb = _distance_parts(inn1, w1, inn2, w2)
            n = max(inn1.size, inn2.size)
            if inn1.size < coeffs.normalize_threshold and inn2.size < coeffs.normalize_threshold:
                n = 1
            n = max(n, 1)
            compat += coeffs.c1_excess * e / n + coeffs.c2_disjoint * d / n + coeffs.c3_weight * wb
            disjoint += d
            wdiff += wb
            excess += e
            pairs += 1
    return GenomicMetrics(
        mean_connections=conns,
        mean_hidden_nodes=hidden,
        mean_compatibility=compat / pairs,
        mean_disjoint=disjoint / pairs,
        mean_weight_difference=wdiff / pairs,
        mean_excess=excess / pairs,
    )


# ---------------------------------------------------------------------------
# serialization


def save_genome(genome: Genome) -> str:
    """Line-oriented text form, one node or connection per line."""
    lines = [f"node {n.id} {n.role}" for n in genome.nodes]
    lines += [
        f"conn {c.innovation} {c.src} {c.dst} {c.weight!r} {int(c.enabled)}"
        for c in genome.connections
    ]
    return "\n".join(lines) + "\n"


def load_genome(text: str) -> Genome:
    nodes = []
    conns = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "node" and len(parts) == 3:
                nodes.append(NodeGene(int(parts[1]), parts[2]))
            elif parts[0] == "conn" and len(parts) == 6:
                conns.append(
                    ConnGene(int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4]), bool(int(parts[5])))
                )
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"genome line {lineno}: cannot parse {raw!r}") from None
    genome = Genome(tuple(nodes), tuple(conns))
    validate_genome(genome)
    return genome
