"""Robustness sweep: every (algorithm, adversary) cell of the properness check.

Writes results/attack_summary.csv with one row per trial.  Respects
ROBUSTCOLOR_THREADS.
"""

import argparse
import csv
import time
from pathlib import Path

from robustcolor.experiments import AttackSpec, TrialSummary, run_attack
from robustcolor.stream import StreamConfig


def cells():
    cubic = StreamConfig(n=64, m=64 * 16, L=16, seed=101)
    for adv in ("mono", "flood", "random"):
        yield AttackSpec("cubic", adv, cubic, 512 if adv == "random" else None)
    for k in (2, 3):
        cfg = StreamConfig(n=128, m=8 * 128 * 16, L=16, k=k, seed=200 + k)
        for adv in ("mono", "flood", "random"):
            if adv == "random":
                yield AttackSpec("switching", adv, cfg, 1500, 0.3)
            else:
                yield AttackSpec("switching", adv, cfg)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "attack_summary.csv"))
    args = ap.parse_args()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TrialSummary.HEADER)
        for spec in cells():
            t0 = time.perf_counter()
            res = run_attack(spec, args.trials)
            w.writerows(s.row() for s, _ in res)
            improper = sum(s.improper for s, _ in res)
            fails = sum(s.failed for s, _ in res)
            print(f"{res[0][0].algorithm}/{spec.adversary}: improper {improper} failed {fails}/{args.trials} "
                  f"max tokens {max(s.tokens for s, _ in res)} ({time.perf_counter() - t0:.1f}s)", flush=True)


if __name__ == "__main__":
    main()
