#!/usr/bin/env python3
"""Opt-in full-scale campaign over the authored mazes.

Runs the per-maze default protocol for each requested strategy over many
seeds (100 by default, hours to days of compute) and reports success counts
and mean evaluations-to-success next to the historical reference means for
this benchmark suite. Informational only: no pass/fail.

Usage:
    python scripts/full_campaign.py --maze medium --runs 100 --workers 2
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from mazevolve.experiment import run_many, write_run_csv
from mazevolve.presets import BUDGETS, preset_run_config

# historical 100-run reference means (evaluations to success; None = expected
# to fail nearly always at this budget)
REFERENCE_EVALS = {
    "medium": {"objective": 48186, "novelty": 19814, "surprise": 16084,
               "surprise-no-prediction": 26452},
    "hard": {"objective": 73643, "novelty": 28493, "surprise": 23566,
             "surprise-no-prediction": 47550},
    "very_hard": {"objective": None, "novelty": 115600, "surprise": 76261,
                  "surprise-no-prediction": 117560},
    "extremely_hard": {"objective": None, "novelty": 178045, "surprise": 154794,
                       "surprise-no-prediction": 200190},
}
REFERENCE_SUCCESSES = {
    "medium": {"objective": 71, "novelty": 100, "surprise": 100,
               "surprise-no-prediction": 93},
    "hard": {"objective": 5, "novelty": 93, "surprise": 99,
             "surprise-no-prediction": 61},
    "very_hard": {"objective": 0, "novelty": 85, "surprise": 99,
                  "surprise-no-prediction": 88},
    "extremely_hard": {"objective": 0, "novelty": 48, "surprise": 67,
                       "surprise-no-prediction": 39},
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--maze", choices=sorted(k for k in BUDGETS if k != "generated"),
                        default="medium")
    parser.add_argument("--strategies", nargs="*",
                        default=["objective", "novelty", "surprise"])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--out", default=None, help="also write per-run CSVs here")
    args = parser.parse_args()

    for kind in args.strategies:
        configs = [
            preset_run_config(args.maze, kind, seed=args.seed + r, stop_on_success=True)
            for r in range(args.runs)
        ]
        records = run_many(configs, workers=args.workers)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for record in records:
                write_run_csv(record, out / f"{args.maze}_{kind}_seed{record.seed}.csv")
        evals = [r.first_success_evaluation for r in records if r.solved]
        mean = np.mean(evals) if evals else float("nan")
        ref_mean = REFERENCE_EVALS[args.maze].get(kind)
        ref_succ = REFERENCE_SUCCESSES[args.maze].get(kind)
        line = (
            f"{args.maze:15s} {kind:22s} successes {len(evals)}/{args.runs}"
            f"  mean_evals {mean:9.0f}"
        )
        if ref_succ is not None:
            scale = 100 / args.runs
            line += f"  [reference: {ref_succ}/100"
            if ref_mean:
                delta = (mean - ref_mean) / ref_mean * 100 if evals else float("nan")
                line += f", mean {ref_mean}, delta {delta:+.0f}%"
            line += f"; success delta {len(evals) * scale - ref_succ:+.0f}pp]"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
