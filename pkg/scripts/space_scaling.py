"""Peak space of insert-only switching vs max degree, k = 2 and 3.

Writes results/space_scaling.csv and prints the log-log slopes.
"""

import argparse
import csv
from pathlib import Path

from robustcolor.experiments import SpaceRow, space_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--deltas", default="4,8,16,32")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--sketch", default="palette", choices=["palette", "exact"])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "space_scaling.csv"))
    args = ap.parse_args()
    deltas = [int(x) for x in args.deltas.split(",")]
    seeds = list(range(args.seeds))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sketch"] + SpaceRow.HEADER)
        for k in (2, 3):
            rows, means, slope = space_scaling(args.n, deltas, k, seeds, args.sketch)
            w.writerows([args.sketch] + r.row() for r in rows)
            print(f"k={k} means {[round(m) for m in means]} slope {slope:.3f}")


if __name__ == "__main__":
    main()
