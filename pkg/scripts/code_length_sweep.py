#!/usr/bin/env python3
"""MI/MMSE of the MI design, the MMSE design and LFM versus code length.

Prints the table plus the relative cross-metric gaps used by the ordering
and proximity checks.
"""
import argparse

from rangeprof.figures import SWEEP_LENGTHS, RunOptions, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=["papr", "spectral", "energy"], default="papr")
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--lengths", type=int, nargs="*", default=list(SWEEP_LENGTHS))
    args = ap.parse_args()
    rows = sweep(args.kind, RunOptions(eps=args.eps, lengths=tuple(args.lengths)))
    table = {}
    for r in rows:
        table.setdefault(r["L"], {})[r["waveform"]] = r
    print(f"{'L':>4} {'MI(mi)':>10} {'MI(mmse)':>10} {'MI(lfm)':>10} {'MMSE(mi)':>10} {'MMSE(mmse)':>11} "
          f"{'MMSE(lfm)':>10} {'dMI%':>6} {'dMMSE%':>7}")
    for L, r in table.items():
        a, b, c = r["mi-design"], r["mmse-design"], r["lfm"]
        print(f"{L:4d} {a['mi']:10.4f} {b['mi']:10.4f} {c['mi']:10.4f} {a['mmse']:10.5f} {b['mmse']:11.5f} "
              f"{c['mmse']:10.5f} {100 * (a['mi'] - b['mi']) / a['mi']:6.2f} "
              f"{100 * (a['mmse'] - b['mmse']) / b['mmse']:7.2f}")


if __name__ == "__main__":
    main()
