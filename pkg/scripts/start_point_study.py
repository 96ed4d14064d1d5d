#!/usr/bin/env python3
"""Spread of converged constant-modulus designs over random-phase starts."""
import argparse

import numpy as np

from rangeprof import RandomPhaseStart, design, jamming_scenario, mmse_value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--starts", type=int, default=50)
    ap.add_argument("--eps", type=float, default=1e-4)
    args = ap.parse_args()
    sc = jamming_scenario()
    for metric in ("mi", "mmse"):
        obj, mm = [], []
        for seed in range(args.starts):
            rep = design(sc.problem(metric, "papr", initial=RandomPhaseStart(seed)), eps=args.eps)
            obj.append(rep.final_objective)
            mm.append(mmse_value(rep.final_waveform, sc.prior(), sc.disturbance()))
        obj, mm = np.array(obj), np.array(mm)
        print(f"{metric}: objective min {obj.min():.6g} median {np.median(obj):.6g} max {obj.max():.6g} "
              f"spread {100 * (obj.max() - obj.min()) / np.median(obj):.3f}%  "
              f"MMSE spread {100 * (mm.max() - mm.min()) / np.median(mm):.3f}%")


if __name__ == "__main__":
    main()
