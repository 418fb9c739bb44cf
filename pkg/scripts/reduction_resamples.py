"""Reduction success rate as a function of Alice's resample cap.

Writes results/reduction_resamples.csv.  Failures split into degree overflow
(Alice) and recovery shortfall (Bob).
"""

import argparse
import csv
from pathlib import Path

from robustcolor.experiments import reduction_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--caps", default="10,13,20")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "reduction_resamples.csv"))
    args = ap.parse_args()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["maxResamples", "trials", "successes", "degreeOverflow", "recoveryShortfall", "otherErrors",
                    "minMeasuredBits", "lowerBoundBits"])
        for cap in (int(x) for x in args.caps.split(",")):
            trials = reduction_trials(64, 8, 4, args.trials, seed=600, max_resamples=cap)
            ok = [t for t in trials if t.success]
            overflow = sum(t.error.startswith("DegreeOverflow") for t in trials)
            short = sum(t.error.startswith("RecoveryShortfall") for t in trials)
            other = len(trials) - len(ok) - overflow - short
            min_bits = min((t.measured_bits for t in ok), default="")
            w.writerow([cap, len(trials), len(ok), overflow, short, other, min_bits,
                        f"{trials[0].lower_bound_bits:.4f}"])
            print(f"cap {cap}: success {len(ok)}/{len(trials)} overflow {overflow} shortfall {short} other {other}")


if __name__ == "__main__":
    main()
