#!/usr/bin/env python3
"""Collision-density curve over the class-1 dedication share.

Sweeps the RAOs dedicated to class 1 (class 2 takes the remainder) for the
50 Hz / 100 Hz pair, writing per-point simulated and closed-form densities
to CSV. The empirical minimum should sit near the proportional share.
"""

import argparse
import sys

from rachopt.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default="scenarios/dc1_dc2.yaml")
    parser.add_argument("--lo", type=int, default=600)
    parser.add_argument("--hi", type=int, default=10200)
    parser.add_argument("--step", type=int, default=600)
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--horizon", type=int, default=50)
    parser.add_argument("--seed", type=int, default=20170831)
    parser.add_argument("--csv", default="results/dedication_sweep.csv")
    args = parser.parse_args()

    import pathlib

    pathlib.Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
    return cli_main(
        [
            "sweep",
            args.scenario,
            "--range",
            f"{args.lo}:{args.hi}",
            "--step",
            str(args.step),
            "--iterations",
            str(args.iterations),
            "--horizon",
            str(args.horizon),
            "--seed",
            str(args.seed),
            "--csv",
            args.csv,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
