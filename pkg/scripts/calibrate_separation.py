"""Sweep the palette list constant c for the flood-vs-random separation run.

Writes results/separation_calibration.csv with one row per (c, seed, target,
adversary).  The acceptance test uses the default c = 4.
"""

import argparse
import csv
from pathlib import Path

from robustcolor.experiments import SeparationRow, separation_ratios, separation_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--L", type=int, default=32)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--cs", default="0.125,0.25,0.5,1,2,4")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "separation_calibration.csv"))
    args = ap.parse_args()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["c"] + SeparationRow.HEADER)
        for c in (float(x) for x in args.cs.split(",")):
            rows = [r for s in range(args.seeds) for r in separation_trial(args.n, args.L, 500 + s, c=c)]
            w.writerows([c] + r.row() for r in rows)
            flood = [r for r in rows if r.target == "palette" and r.adversary == "flood"]
            print(f"c={c}: ratios {separation_ratios(rows)}, palette flood steps "
                  f"{[r.steps for r in flood]}, failed {[int(r.failed) for r in flood]}", flush=True)


if __name__ == "__main__":
    main()
