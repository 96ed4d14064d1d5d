#!/usr/bin/env python3
"""Regenerate the CSV data behind every figure into ``--out`` (default ./figures)."""
import argparse
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from rangeprof.figures import FIGURES, RunOptions, reproduce


def run(fig, out, starts):
    summary = reproduce(fig, Path(out) / fig, RunOptions(starts=starts))
    return fig, summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--starts", type=int, default=50, help="random starts for 3_5a/3_5b")
    ap.add_argument("figures", nargs="*", default=sorted(FIGURES))
    args = ap.parse_args()
    with ProcessPoolExecutor(args.jobs) as pool:
        for fig, _ in pool.map(run, args.figures, [args.out] * len(args.figures), [args.starts] * len(args.figures)):
            print(f"{fig}: done")


if __name__ == "__main__":
    main()
