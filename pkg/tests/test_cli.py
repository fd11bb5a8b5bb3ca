"""End-to-end CLI behaviour: files, exit codes, determinism."""

import numpy as np
import pytest

from mazevolve.cli import main
from mazevolve.experiment import read_run_csv
from mazevolve.mazesim import MazeSpec, dump_maze, load_maze


@pytest.fixture
def workspace(tmp_path):
    w = h = 160.0
    walls = ((0.0, 0.0, w, 0.0), (w, 0.0, w, h), (0.0, h, w, h), (0.0, 0.0, 0.0, h))
    maze = MazeSpec(w, h, walls, (30.0, 30.0), (60.0, 45.0))
    maze_path = tmp_path / "room.txt"
    maze_path.write_text(dump_maze(maze))
    config_path = tmp_path / "quick.cfg"
    config_path.write_text(
        f"""
# quick desk-scale run
experiment.maze = {maze_path}
experiment.population = 24
experiment.generations = 10
experiment.steps = 80
experiment.stop_on_success = true
strategy.kind = objective
strategy.n_nearest = 2
strategy.cluster_count = 6
"""
    )
    return tmp_path, maze_path, config_path


class TestRunCommand:
    def test_creates_outputs(self, workspace, capsys):
        tmp, _, cfg = workspace
        out = tmp / "results"
        assert main(["run", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("solved=")
        assert (out / "quick_seed5.csv").is_file()
        assert (out / "quick_seed5.genome.txt").is_file()

    def test_missing_maze_names_path(self, workspace, capsys):
        tmp, maze_path, cfg = workspace
        bad = cfg.read_text().replace(str(maze_path), str(tmp / "nowhere.txt"))
        bad_cfg = tmp / "bad.cfg"
        bad_cfg.write_text(bad)
        assert main(["run", "--config", str(bad_cfg), "--out", str(tmp / "o")]) != 0
        assert "nowhere.txt" in capsys.readouterr().err

    def test_unknown_config_key_named(self, workspace, capsys):
        tmp, _, cfg = workspace
        broken = tmp / "broken.cfg"
        broken.write_text(cfg.read_text() + "neat.wrong_knob = 3\n")
        assert main(["run", "--config", str(broken), "--out", str(tmp / "o")]) != 0
        assert "neat.wrong_knob" in capsys.readouterr().err

    def test_repeat_invocation_identical_bytes(self, workspace):
        tmp, _, cfg = workspace
        out_a, out_b = tmp / "a", tmp / "b"
        for out in (out_a, out_b):
            assert main(["run", "--config", str(cfg), "--seed", "7", "--out", str(out)]) == 0
        assert (out_a / "quick_seed7.csv").read_bytes() == (out_b / "quick_seed7.csv").read_bytes()
        assert (
            out_a / "quick_seed7.genome.txt"
        ).read_bytes() == (out_b / "quick_seed7.genome.txt").read_bytes()


class TestBatchCommand:
    def write_manifest(self, tmp, cfg, seeds, workers=1):
        manifest = tmp / "batch.txt"
        lines = [f"workers = {workers}", f"out = {tmp / 'batch_out'}"]
        lines += [f"run = {cfg.name} {s}" for s in seeds]
        manifest.write_text("\n".join(lines) + "\n")
        return manifest

    def test_two_runs_with_aggregates(self, workspace):
        tmp, _, cfg = workspace
        manifest = self.write_manifest(tmp, cfg, [3, 4])
        assert main(["batch", str(manifest)]) == 0
        out = tmp / "batch_out"
        assert (out / "quick_seed3.csv").is_file()
        assert (out / "quick_seed4.csv").is_file()
        assert (out / "efficiency_room_objective.csv").is_file()
        assert (out / "robustness_room_objective.csv").is_file()
        assert (out / "heatmap_room_objective.pgm").is_file()

    def test_worker_count_does_not_change_outputs(self, workspace):
        tmp, _, cfg = workspace
        m1 = self.write_manifest(tmp, cfg, [3, 4, 5], workers=1)
        assert main(["batch", str(m1), "--out", str(tmp / "w1")]) == 0
        m2 = self.write_manifest(tmp, cfg, [3, 4, 5], workers=2)
        assert main(["batch", str(m2), "--out", str(tmp / "w2")]) == 0
        for name in ("quick_seed3.csv", "quick_seed4.csv", "quick_seed5.csv"):
            assert (tmp / "w1" / name).read_bytes() == (tmp / "w2" / name).read_bytes()

    def test_empty_manifest_rejected(self, workspace, capsys):
        tmp, _, _ = workspace
        manifest = tmp / "empty.txt"
        manifest.write_text("workers = 1\n")
        assert main(["batch", str(manifest)]) != 0


class TestGenerateCommand:
    def test_pinned_suite(self, tmp_path):
        out = tmp_path / "gen"
        assert main(["generate", "--count", "3", "--seed", "42", "--out", str(out)]) == 0
        manifest = (out / "manifest.txt").read_text()
        assert sum(1 for l in manifest.splitlines() if l.startswith("maze ")) == 3
        spec = load_maze((out / "maze_000.txt").read_text())
        assert (spec.width, spec.height) == (200.0, 200.0)
        # regeneration reproduces the same files
        out2 = tmp_path / "gen2"
        assert main(["generate", "--count", "3", "--seed", "42", "--out", str(out2)]) == 0
        for name in ("maze_000.txt", "maze_001.txt", "maze_002.txt"):
            assert (out / name).read_bytes() == (out2 / name).read_bytes()

    def test_single_forced_subdivisions(self, tmp_path):
        gen_cfg = tmp_path / "gen.cfg"
        gen_cfg.write_text("subdivisions_min = 2\nsubdivisions_max = 2\n")
        out = tmp_path / "one"
        assert main(
            ["generate", "--count", "1", "--seed", "1", "--out", str(out), "--config", str(gen_cfg)]
        ) == 0
        spec = load_maze((out / "maze_000.txt").read_text())
        assert len(spec.walls) == 4 + 2 * 2

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        assert main(["generate", "--count", "1", "--out", str(blocker / "sub")]) != 0


class TestSensitivityCommand:
    def test_four_cell_grid(self, workspace):
        tmp, _, cfg = workspace
        out = tmp / "sweep"
        assert (
            main(
                [
                    "sensitivity", "--config", str(cfg), "--out", str(out),
                    "--grid", "cluster_count=4,8;n_nearest=1,2", "--runs", "2", "--seed", "3",
                ]
            )
            == 0
        )
        lines = (out / "sensitivity.csv").read_text().splitlines()
        assert lines[0] == "params,successes,mean_evaluations"
        assert len(lines) == 5

    def test_single_cell_selected(self, workspace, capsys):
        tmp, _, cfg = workspace
        out = tmp / "sweep1"
        assert (
            main(
                [
                    "sensitivity", "--config", str(cfg), "--out", str(out),
                    "--grid", "n_nearest=2", "--runs", "1",
                ]
            )
            == 0
        )
        assert "selected: n_nearest=2" in capsys.readouterr().out

    def test_zero_runs_rejected(self, workspace):
        tmp, _, cfg = workspace
        assert (
            main(
                [
                    "sensitivity", "--config", str(cfg), "--out", str(tmp / "x"),
                    "--grid", "n_nearest=2", "--runs", "0",
                ]
            )
            != 0
        )


class TestRoundTrips:
    def test_run_csv_reparses(self, workspace):
        tmp, _, cfg = workspace
        out = tmp / "rt"
        assert main(["run", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
        summary = read_run_csv(out / "quick_seed9.csv")
        assert summary.footer["seed"] == "9"
        assert summary.generations[0] == 1

    def test_generated_maze_reloads_equal(self, tmp_path):
        out = tmp_path / "gen"
        assert main(["generate", "--count", "1", "--seed", "8", "--out", str(out)]) == 0
        text = (out / "maze_000.txt").read_text()
        spec = load_maze(text)
        assert dump_maze(spec) == text
