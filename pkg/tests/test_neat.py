"""NEAT engine: genome construction, activation, distance, reproduction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mazevolve.config import ConfigError, NeatConfig
from mazevolve.neat import (
    BIAS,
    HIDDEN,
    ConnGene,
    Genome,
    Innovations,
    NodeGene,
    activate,
    compatibility_distance,
    genomic_metrics,
    init_population,
    io_nodes,
    load_genome,
    reproduce,
    save_genome,
    speciate,
    validate_genome,
)

COEFFS = NeatConfig()


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def sigmoid(x, slope=4.9):
    return 1.0 / (1.0 + math.exp(-slope * x))


def tiny_genome(weights_by_innovation, extra_nodes=()):
    """Genome with the standard 13 io nodes plus explicit connection genes."""
    nodes = io_nodes() + tuple(extra_nodes)
    conns = tuple(
        ConnGene(inn, src, dst, w, True)
        for inn, (src, dst, w) in sorted(weights_by_innovation.items())
    )
    return Genome(nodes, conns)


def random_genome(rng, n_extra_conns=0, n_hidden=0):
    """A structurally valid genome with randomized weights and topology."""
    pop, innovations = init_population((10, 2), 2, rng)
    g = pop.members[0]
    nodes = list(g.nodes)
    conns = list(g.connections)
    innovations.begin_generation()
    for _ in range(n_hidden):
        pick = int(rng.integers(len(conns)))
        old = conns[pick]
        if not old.enabled:
            continue
        conns[pick] = ConnGene(old.innovation, old.src, old.dst, old.weight, False)
        node_id, i1, i2 = innovations.node_split(old.innovation)
        if any(n.id == node_id for n in nodes):
            continue
        nodes.append(NodeGene(node_id, HIDDEN))
        conns.append(ConnGene(i1, old.src, node_id, 1.0, True))
        conns.append(ConnGene(i2, node_id, old.dst, old.weight, True))
        innovations.begin_generation()
    existing = {(c.src, c.dst) for c in conns}
    ids = [n.id for n in nodes]
    targets = [n.id for n in nodes if n.role in ("output", "hidden")]
    for _ in range(n_extra_conns):
        src = ids[int(rng.integers(len(ids)))]
        dst = targets[int(rng.integers(len(targets)))]
        if (src, dst) in existing:
            continue
        existing.add((src, dst))
        conns.append(
            ConnGene(innovations.connection(src, dst), src, dst, float(rng.uniform(-1, 1)), True)
        )
        innovations.begin_generation()
    conns.sort(key=lambda c: c.innovation)
    genome = Genome(tuple(nodes), tuple(conns))
    validate_genome(genome)
    return genome


class TestInitPopulation:
    def test_full_bipartite(self):
        pop, _ = init_population((10, 2), 250, rng_for(1))
        assert pop.size == 250
        for g in pop.members:
            assert len(g.connections) == 22
            assert g.hidden_count() == 0
            assert all(-1.0 <= c.weight <= 1.0 for c in g.connections)
            validate_genome(g)

    def test_minimal_population_distinct_weights(self):
        pop, _ = init_population((10, 2), 2, rng_for(2))
        w0 = [c.weight for c in pop.members[0].connections]
        w1 = [c.weight for c in pop.members[1].connections]
        assert w0 != w1

    def test_same_seed_identical(self):
        pop_a, _ = init_population((10, 2), 10, rng_for(3))
        pop_b, _ = init_population((10, 2), 10, rng_for(3))
        assert pop_a.members == pop_b.members

    def test_too_small_rejected(self):
        with pytest.raises(ConfigError):
            init_population((10, 2), 1, rng_for(4))


class TestActivate:
    def test_zero_network(self):
        g = tiny_genome({i: (s, o, 0.0) for i, (s, o) in enumerate(
            (s, o) for s in range(11) for o in (11, 12))})
        assert activate(g, [0.3] * 10) == (0.5, 0.5)

    def test_single_bias_edge(self):
        for w in (-2.0, -0.5, 0.0, 0.7, 3.0):
            g = tiny_genome({0: (0, 11, w)})
            out0, out1 = activate(g, [0.0] * 10)
            assert out0 == pytest.approx(sigmoid(w), abs=1e-15)
            assert out1 == 0.5

    def test_pure_function(self):
        g = random_genome(rng_for(5), n_extra_conns=4, n_hidden=2)
        inputs = list(np.linspace(0, 1, 10))
        assert activate(g, inputs) == activate(g, inputs)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_outputs_in_open_unit_interval(self, seed):
        rng = rng_for(seed)
        g = random_genome(rng, n_extra_conns=3, n_hidden=1)
        out = activate(g, rng.uniform(0, 1, 10))
        assert all(0.0 < o < 1.0 for o in out)


class TestCompatibility:
    def test_identical_zero(self):
        g = random_genome(rng_for(6))
        assert compatibility_distance(g, g, COEFFS) == 0.0

    def test_one_excess_gene(self):
        # small genomes (below the normalization threshold): delta = c1 * 1
        g1 = tiny_genome({0: (0, 11, 0.5), 1: (1, 11, -0.25)})
        g2 = tiny_genome({0: (0, 11, 0.5), 1: (1, 11, -0.25), 7: (2, 12, 0.9)})
        assert compatibility_distance(g1, g2, COEFFS) == pytest.approx(COEFFS.c1_excess)

    def test_weight_difference_only(self):
        g1 = tiny_genome({0: (0, 11, 0.5)})
        g2 = tiny_genome({0: (0, 11, -0.5)})
        assert compatibility_distance(g1, g2, COEFFS) == pytest.approx(COEFFS.c3_weight * 1.0)

    @given(s1=st.integers(0, 2**32 - 1), s2=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_symmetric_nonnegative(self, s1, s2):
        g1 = random_genome(rng_for(s1), n_extra_conns=s1 % 4, n_hidden=s1 % 3)
        g2 = random_genome(rng_for(s2), n_extra_conns=s2 % 4, n_hidden=s2 % 3)
        d12 = compatibility_distance(g1, g2, COEFFS)
        d21 = compatibility_distance(g2, g1, COEFFS)
        assert d12 == d21 >= 0.0
        assert compatibility_distance(g1, g1, COEFFS) == 0.0


class TestSpeciate:
    def test_identical_population_one_species(self):
        g = random_genome(rng_for(7))
        species = speciate((g,) * 8, 3.0, COEFFS)
        assert len(species) == 1
        assert sorted(species[0].members) == list(range(8))

    def test_two_clusters(self):
        # heavy weight contrast on matching genes: delta = c3 * |dw| between clusters
        a = tiny_genome({0: (0, 11, 2.0), 1: (1, 11, 2.0)})
        b = tiny_genome({0: (0, 11, -2.0), 1: (1, 11, -2.0)})
        assert compatibility_distance(a, b, COEFFS) == pytest.approx(12.0)
        species = speciate((a, a, b, b), 6.0, COEFFS)
        assert len(species) == 2
        assert sorted(species[0].members) == [0, 1]
        assert sorted(species[1].members) == [2, 3]

    def test_infinite_threshold_single_species(self):
        genomes = tuple(random_genome(rng_for(s), n_extra_conns=2) for s in range(6))
        assert len(speciate(genomes, math.inf, COEFFS)) == 1


class TestReproduce:
    def test_elitism_preserves_best(self):
        rng = rng_for(8)
        pop, innovations = init_population((10, 2), 20, rng)
        scores = np.arange(20, dtype=float)
        nxt = reproduce(pop, scores, NeatConfig(), rng, innovations)
        assert pop.members[19] in nxt.members

    def test_no_variation_copies(self):
        rng = rng_for(9)
        pop, innovations = init_population((10, 2), 12, rng)
        cfg = NeatConfig(
            weight_mutate_prob=0.0, add_connection_prob=0.0, add_node_prob=0.0,
            crossover_prob=0.0,
        )
        nxt = reproduce(pop, rng.uniform(0, 1, 12), cfg, rng, innovations)
        assert nxt.size == 12
        assert set(nxt.members) <= set(pop.members)
        # all structures identical at init: the structure multiset is preserved
        structure = lambda g: tuple((c.innovation, c.src, c.dst, c.enabled) for c in g.connections)
        assert sorted(map(structure, nxt.members)) == sorted(map(structure, pop.members))

    def test_fixed_seed_identical(self):
        pop, _ = init_population((10, 2), 15, rng_for(10))
        scores = rng_for(11).uniform(0, 5, 15)
        results = []
        for _ in range(2):
            innovations = Innovations(22, 13)
            results.append(reproduce(pop, scores, NeatConfig(), rng_for(12), innovations))
        assert results[0].members == results[1].members

    def test_uniform_scores_ok(self):
        rng = rng_for(13)
        pop, innovations = init_population((10, 2), 10, rng)
        nxt = reproduce(pop, np.full(10, 2.5), NeatConfig(), rng, innovations)
        assert nxt.size == 10

    @given(seed=st.integers(0, 2**32 - 1), size=st.integers(2, 40))
    @settings(max_examples=20, deadline=None)
    def test_population_size_preserved(self, seed, size):
        rng = rng_for(seed)
        pop, innovations = init_population((10, 2), size, rng)
        for _ in range(3):
            scores = rng.uniform(0, 10, size)
            pop = reproduce(pop, scores, NeatConfig(), rng, innovations)
            assert pop.size == size
            partition = sorted(i for s in pop.species for i in s.members)
            assert partition == list(range(size))

    def test_innovations_never_collide(self):
        rng = rng_for(14)
        pop, innovations = init_population((10, 2), 30, rng)
        cfg = NeatConfig(add_connection_prob=0.9, add_node_prob=0.5)
        for _ in range(6):
            pop = reproduce(pop, rng.uniform(0, 1, 30), cfg, rng, innovations)
            for g in pop.members:
                validate_genome(g)
        # one innovation number never maps to two different structures
        seen = {}
        for g in pop.members:
            for c in g.connections:
                key = seen.setdefault(c.innovation, (c.src, c.dst))
                assert key == (c.src, c.dst)


class TestGenomicMetrics:
    def test_identical_population_zero_diversity(self):
        g = random_genome(rng_for(15))
        m = genomic_metrics((g, g, g), COEFFS)
        assert m.mean_compatibility == m.mean_disjoint == m.mean_excess == 0.0
        assert m.mean_weight_difference == 0.0

    def test_hand_built_pair(self):
        g1 = tiny_genome({0: (0, 11, 0.5), 1: (1, 11, 1.0)})
        g2 = tiny_genome({0: (0, 11, 0.5), 1: (1, 11, 0.0), 5: (2, 12, 0.3)})
        m = genomic_metrics((g1, g2), COEFFS)
        assert m.mean_excess == 1.0
        assert m.mean_disjoint == 0.0
        assert m.mean_weight_difference == pytest.approx(0.5)
        assert m.mean_compatibility == pytest.approx(
            COEFFS.c1_excess * 1.0 + COEFFS.c3_weight * 0.5
        )
        assert m.mean_connections == 2.5
        assert m.mean_hidden_nodes == 0.0

    def test_fresh_population_mean_connections(self):
        pop, _ = init_population((10, 2), 12, rng_for(16))
        assert genomic_metrics(pop.members, COEFFS).mean_connections == 22.0


class TestSerialization:
    def test_round_trip(self):
        g = random_genome(rng_for(17), n_extra_conns=5, n_hidden=2)
        assert load_genome(save_genome(g)) == g

    def test_bad_line_reports_position(self):
        with pytest.raises(ValueError, match="line 1"):
            load_genome("nonsense 1 2 3\n")
