#!/usr/bin/env python3
"""Report geometry sanity for the bundled mazes: solvability at robot
clearance and grid-measured shortest path versus the recorded metadata."""

from mazevolve.mazegen import grid_path_length, verify_solvable
from mazevolve.mazesim import bundled_maze_names, resolve_maze


def main() -> None:
    print(f"{'maze':18s} {'recorded':>9s} {'measured':>9s} {'ratio':>6s} {'solvable':>9s}")
    for name in bundled_maze_names():
        spec = resolve_maze(name)
        measured = grid_path_length(spec, cell_size=2.0)
        solvable = verify_solvable(spec, cell_size=5.0)
        recorded = spec.path_length or float("nan")
        ratio = measured / recorded if measured else float("nan")
        print(
            f"{name:18s} {recorded:9.0f} {measured or -1:9.1f} {ratio:6.2f} {str(solvable):>9s}"
        )


if __name__ == "__main__":
    main()
