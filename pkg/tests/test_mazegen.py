"""Recursive-division generator and flood-fill solvability."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mazevolve.config import ConfigError, GeneratorConfig
from mazevolve.mazegen import (
    generate,
    generate_with_report,
    grid_path_length,
    verify_solvable,
)
from mazevolve.mazesim import MazeSpec, dump_maze


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def room_with(walls=(), w=200.0, h=200.0, start=(20.0, 20.0), goal=(180.0, 180.0)):
    boundary = ((0.0, 0.0, w, 0.0), (w, 0.0, w, h), (0.0, h, w, h), (0.0, 0.0, 0.0, h))
    return MazeSpec(w, h, boundary + tuple(walls), start, goal)


class TestGenerate:
    def test_zero_subdivisions_empty_room(self):
        cfg = GeneratorConfig(subdivisions_min=0, subdivisions_max=0)
        maze, report = generate_with_report(cfg, rng_for(1))
        assert len(maze.walls) == 4
        assert report.subdivisions_performed == 0

    def test_single_subdivision_one_wall_one_hole(self):
        cfg = GeneratorConfig(subdivisions_min=1, subdivisions_max=1)
        maze, report = generate_with_report(cfg, rng_for(2))
        assert report.subdivisions_performed == 1
        interior = maze.walls[4:]
        assert len(interior) == 2
        # both segments are collinear pieces of one dividing wall
        if interior[0][0] == interior[0][2]:  # vertical
            assert interior[0][0] == interior[1][0]
            ends = sorted([interior[0][1], interior[0][3], interior[1][1], interior[1][3]])
        else:
            assert interior[0][1] == interior[1][1]
            ends = sorted([interior[0][0], interior[0][2], interior[1][0], interior[1][2]])
        assert ends[2] - ends[1] == pytest.approx(cfg.hole_width)

    def test_axis_aligned_interior_walls(self):
        cfg = GeneratorConfig(subdivisions_min=2, subdivisions_max=6)
        for seed in range(5):
            maze = generate(cfg, rng_for(seed))
            for x1, y1, x2, y2 in maze.walls:
                assert x1 == x2 or y1 == y2

    def test_reproducible(self):
        cfg = GeneratorConfig(subdivisions_min=2, subdivisions_max=6)
        a = generate(cfg, rng_for(7))
        b = generate(cfg, rng_for(7))
        assert dump_maze(a) == dump_maze(b)

    def test_sixty_mazes_solvable(self):
        cfg = GeneratorConfig(subdivisions_min=2, subdivisions_max=6)
        for seed in range(60):
            maze = generate(cfg, rng_for(seed))
            assert verify_solvable(maze, cfg.verify_cell_size)

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            generate(GeneratorConfig(corridor_min=10.0), rng_for(1))


class TestVerifySolvable:
    def test_empty_room(self):
        assert verify_solvable(room_with(), 10.0)

    def test_bisected_room(self):
        blocked = room_with([(100.0, 0.0, 100.0, 200.0)])
        assert not verify_solvable(blocked, 10.0)

    def test_blocked_start_is_diagnosed(self, caplog):
        cramped = room_with(start=(3.0, 3.0))
        with caplog.at_level("WARNING"):
            assert not verify_solvable(cramped, 10.0)
        assert "start" in caplog.text

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_generator_output_always_solvable(self, seed):
        cfg = GeneratorConfig(subdivisions_min=2, subdivisions_max=6)
        maze = generate(cfg, rng_for(seed))
        assert verify_solvable(maze, cfg.verify_cell_size)


class TestPathLength:
    def test_empty_room_close_to_euclidean(self):
        maze = room_with()
        direct = np.hypot(160.0, 160.0)
        measured = grid_path_length(maze, cell_size=4.0)
        assert measured == pytest.approx(direct, rel=0.10)

    def test_detour_longer_than_direct(self):
        maze = room_with([(100.0, 0.0, 100.0, 160.0)])
        assert grid_path_length(maze, cell_size=4.0) > np.hypot(160.0, 160.0)
