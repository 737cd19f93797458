#!/usr/bin/env python3
"""Log-log plot of convergence CSVs produced by `dispersl sweep-dt` /
`dispersl sweep-h`.

Usage: plot_convergence.py [--against dt|h] [--out plot.png] file1.csv [file2.csv ...]
"""

import argparse
import csv
import math
import sys


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    xs_dt = [float(r["dt"]) for r in rows]
    xs_h = [float(r["h"]) for r in rows]
    ys = [float(r["rel_l2_error"]) for r in rows if r["rel_l2_error"]]
    if len(ys) != len(rows):
        sys.exit(f"{path}: some rows have no error column (reference = none?)")
    return xs_dt, xs_h, ys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csvs", nargs="+")
    ap.add_argument("--against", choices=["dt", "h"], default="dt")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    import matplotlib

    if args.out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 5))
    for path in args.csvs:
        xs_dt, xs_h, ys = load(path)
        xs = xs_dt if args.against == "dt" else xs_h
        ax.loglog(xs, ys, "o-", label=path)
        if len(xs) >= 2:
            slope = (math.log(ys[-1]) - math.log(ys[-2])) / (
                math.log(xs[-1]) - math.log(xs[-2])
            )
            print(f"{path}: tail slope {slope:.3f}")
    ax.set_xlabel("time step dt" if args.against == "dt" else "mesh size h")
    ax.set_ylabel("relative L2 error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
