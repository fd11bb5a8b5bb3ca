"""Divergent neuroevolution on deceptive mazes.

Six reward strategies (goal proximity, novelty with an archive, deviation
from predicted behaviours, and three baselines) drive a minimal NEAT engine
through 2D maze navigation tasks, with a generator for random benchmark
mazes and an experiment harness that reproduces efficiency, robustness,
spatial-entropy and genome-diversity measurements.
"""

__version__ = "0.1.0"
