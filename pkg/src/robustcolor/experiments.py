"""Experiment drivers shared by the CLI, the scripts, and the acceptance suite."""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .avoid import ReductionSetup, ReductionTrial, run_reduction
from .cubic import CubicColorer
from .harness import (
    Adversary,
    ConflictFloodAdversary,
    FileAdversary,
    GameTranscript,
    MonochromaticAdversary,
    RandomAdversary,
    run_game,
)
from .prf import derive_seed
from .sketches import ExactBufferSketch, PaletteSketch, Sketch
from .stream import EdgeToken, StreamConfig
from .switching import SwitchingColorer

ALGORITHMS = ("cubic", "switching", "exact", "palette")
ADVERSARIES = ("mono", "flood", "random", "file")


def parse_algorithm(name: str, k: int) -> tuple[str, int]:
    """Accept 'switching-3' as shorthand for switching with k=3."""
    if name.startswith("switching-"):
        try:
            return "switching", int(name.split("-", 1)[1])
        except ValueError:
            raise ValueError(f"bad switching level in {name!r}") from None
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)} or switching-<k>")
    return name, k


def make_algorithm(name: str, cfg: StreamConfig, sketch: str = "palette", insert_only: bool = False,
                   materialize: str = "lazy") -> Sketch:
    if name == "cubic":
        return CubicColorer(cfg)
    if name == "switching":
        return SwitchingColorer(cfg, sketch=sketch, insert_only=insert_only, materialize=materialize)
    if name == "exact":
        return ExactBufferSketch(cfg, cfg.seed)
    if name == "palette":
        return PaletteSketch(cfg, cfg.seed)
    raise ValueError(f"unknown algorithm {name!r}")


def make_adversary(name: str, cfg: StreamConfig, seed: int, steps: int | None = None,
                   delete_prob: float = 0.0, tokens: Sequence[EdgeToken] | None = None) -> Adversary:
    if name == "mono":
        return MonochromaticAdversary(cfg, seed)
    if name == "flood":
        return ConflictFloodAdversary(cfg, seed)
    if name == "random":
        return RandomAdversary(cfg, seed, steps=steps, delete_prob=delete_prob)
    if name == "file":
        if tokens is None:
            raise ValueError("the file adversary needs a stream")
        return FileAdversary(tokens)
    raise ValueError(f"unknown adversary {name!r}")


class StepCap(Adversary):
    """Stops another adversary after ``steps`` tokens."""

    def __init__(self, inner: Adversary, steps: int):
        self.inner, self.steps, self.used = inner, steps, 0

    def next_token(self, history):
        if self.used >= self.steps:
            return None
        self.used += 1
        return self.inner.next_token(history)


@dataclass(frozen=True)
class AttackSpec:
    algorithm: str
    adversary: str
    cfg: StreamConfig
    steps: int | None = None
    delete_prob: float = 0.0
    query_every_token: bool = True
    sketch: str = "palette"
    tokens: tuple[EdgeToken, ...] | None = None


@dataclass
class TrialSummary:
    trial: int
    seed: int
    algorithm: str
    adversary: str
    n: int
    m: int
    L: int
    k: int
    tokens: int
    queries: int
    improper: int
    failed: bool
    fail_step: int | None
    max_colors: int
    peak_space: int
    checkpoints: int

    HEADER = ["trial", "seed", "algorithm", "adversary", "n", "m", "L", "k", "tokens", "queries",
              "improper", "failed", "failStep", "maxColors", "peakSpace", "checkpoints"]

    def row(self) -> list:
        return [self.trial, self.seed, self.algorithm, self.adversary, self.n, self.m, self.L, self.k,
                self.tokens, self.queries, self.improper, int(self.failed),
                "" if self.fail_step is None else self.fail_step, self.max_colors, self.peak_space,
                self.checkpoints]

    def line(self) -> str:
        status = "FAIL" if self.failed else ("IMPROPER" if self.improper else "ok")
        return (f"trial {self.trial:4d} seed {self.seed:#018x} tokens {self.tokens:5d} queries {self.queries:5d} "
                f"improper {self.improper} maxColors {self.max_colors} peakSpace {self.peak_space} {status}")


def trial_seeds(base: int, trial: int) -> tuple[int, int]:
    """Independent (algorithm, adversary) seeds for one trial."""
    return derive_seed(base, trial, 1), derive_seed(base, trial, 2)


def run_attack_trial(spec: AttackSpec, trial: int) -> tuple[TrialSummary, GameTranscript]:
    alg_seed, adv_seed = trial_seeds(spec.cfg.seed, trial)
    cfg = StreamConfig(n=spec.cfg.n, m=spec.cfg.m, L=spec.cfg.L, k=spec.cfg.k,
                       delta=spec.cfg.delta, seed=alg_seed)
    alg = make_algorithm(spec.algorithm, cfg, spec.sketch)
    adv = make_adversary(spec.adversary, cfg, adv_seed, spec.steps, spec.delete_prob, spec.tokens)
    if spec.steps is not None and spec.adversary in ("mono", "flood"):
        adv = StepCap(adv, spec.steps)
    tr = run_game(alg, adv, cfg, spec.query_every_token)
    peak = max(tr.space_proxy_samples, default=0)
    summary = TrialSummary(
        trial=trial, seed=alg_seed, algorithm=spec.algorithm if spec.algorithm != "switching"
        else f"switching-{cfg.k}", adversary=spec.adversary, n=cfg.n, m=cfg.m, L=cfg.L, k=cfg.k,
        tokens=len(tr.tokens), queries=len(tr.proper_flags), improper=tr.improper_count,
        failed=tr.failed, fail_step=tr.failures[0].step if tr.failures else None,
        max_colors=max(tr.colors_used, default=0), peak_space=peak,
        checkpoints=len(getattr(alg, "events", ())))
    return summary, tr


def _attack_worker(args):
    spec, trial = args
    return run_attack_trial(spec, trial)


def worker_count() -> int:
    raw = os.environ.get("ROBUSTCOLOR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"ROBUSTCOLOR_THREADS must be an integer, got {raw!r}") from None


def run_attack(spec: AttackSpec, trials: int, on_trial: Callable | None = None, workers: int | None = None):
    """Run ``trials`` independent games; results come back in trial order."""
    workers = worker_count() if workers is None else workers
    jobs = [(spec, t) for t in range(trials)]
    if workers <= 1:
        results = []
        for job in jobs:
            res = _attack_worker(job)
            if on_trial:
                on_trial(*res)
            results.append(res)
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = []
        for res in pool.map(_attack_worker, jobs):
            if on_trial:
                on_trial(*res)
            results.append(res)
        return results


# -- space scaling ---------------------------------------------------------------------

@dataclass
class SpaceRow:
    k: int
    n: int
    delta: int
    seed: int
    tokens: int
    peak_space: int

    HEADER = ["k", "n", "Delta", "seed", "tokens", "peakSpace"]

    def row(self):
        return [self.k, self.n, self.delta, self.seed, self.tokens, self.peak_space]


def space_run(n: int, delta: int, k: int, seed: int, sketch: str = "palette") -> SpaceRow:
    """Peak space of insert-only switching on a random stream with max degree <= delta.

    The stream aims for n·delta/2 insertions (m is set to that), stopping early
    only if no admissible edge is left.
    """
    m = n * delta // 2
    alg_seed, adv_seed = trial_seeds(seed, delta)
    cfg = StreamConfig(n=n, m=m, L=delta, k=k, seed=alg_seed)
    alg = SwitchingColorer(cfg, sketch=sketch, insert_only=True, materialize="eager")
    tr = run_game(alg, RandomAdversary(cfg, adv_seed, steps=m), cfg, query_every_token=False)
    return SpaceRow(k, n, delta, seed, len(tr.tokens), alg.peak_space)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def space_scaling(n: int, deltas: Sequence[int], k: int, seeds: Sequence[int], sketch: str = "palette"):
    rows = [space_run(n, d, k, s, sketch) for d in deltas for s in seeds]
    means = [float(np.mean([r.peak_space for r in rows if r.delta == d])) for d in deltas]
    return rows, means, loglog_slope(deltas, means)


# -- separation ------------------------------------------------------------------------

@dataclass
class SeparationRow:
    seed: int
    target: str
    adversary: str
    steps: int
    stored: int
    failed: bool = False

    HEADER = ["seed", "target", "adversary", "steps", "storedEdges", "failed"]

    def row(self):
        return [self.seed, self.target, self.adversary, self.steps, self.stored, int(self.failed)]


def _stored(alg) -> int:
    return alg.stored_edges if isinstance(alg, CubicColorer) else alg.stored_count


def separation_trial(n: int, L: int, seed: int, steps: int | None = None, c: float = 4) -> list[SeparationRow]:
    """Stored edges under the flood attack and under an oblivious random stream.

    Both targets (palette sketch, cubic colorer) face both adversaries with the
    same step budget, default n·log2(n).
    """
    steps = steps if steps is not None else n * math.ceil(math.log2(n))
    alg_seed, adv_seed = trial_seeds(seed, 0)
    cfg = StreamConfig(n=n, m=steps, L=L, seed=alg_seed)
    rows = []
    targets = {"palette": lambda: PaletteSketch(cfg, alg_seed, c=c), "cubic": lambda: CubicColorer(cfg)}
    for name, mk in targets.items():
        alg = mk()
        tr = run_game(alg, StepCap(ConflictFloodAdversary(cfg), steps), cfg)
        rows.append(SeparationRow(seed, name, "flood", len(tr.tokens), _stored(alg), tr.failed))
        alg = mk()
        # oblivious: the stream ignores every output, so queries are not needed
        tr = run_game(alg, RandomAdversary(cfg, adv_seed, steps=steps), cfg, query_every_token=False)
        rows.append(SeparationRow(seed, name, "random", len(tr.tokens), _stored(alg), tr.failed))
    return rows


def separation_ratios(rows: Sequence[SeparationRow]) -> dict[str, float]:
    out = {}
    for target in sorted({r.target for r in rows}):
        flood = [r.stored for r in rows if r.target == target and r.adversary == "flood"]
        rand = [r.stored for r in rows if r.target == target and r.adversary == "random"]
        out[target] = float(np.mean(flood) / np.mean(rand)) if np.mean(rand) else math.inf
    return out


# -- reduction -------------------------------------------------------------------------

def reduction_stream_budget(setup: ReductionSetup) -> int:
    """Alice's a edges per block plus at most K pairs per block per Bob round."""
    return setup.s * (setup.a + setup.rounds * setup.K)


def reduction_trials(n: int, K: int, L: int, trials: int, seed: int = 0, algorithm: str = "switching",
                     k: int = 2, max_resamples: int = 10) -> list[ReductionTrial]:
    out = []
    for t in range(trials):
        tseed = derive_seed(seed, t, 3)
        setup = ReductionSetup(n, K, L, seed=tseed, max_resamples=max_resamples)
        cfg = StreamConfig(n=n, m=reduction_stream_budget(setup), L=L, k=k, seed=derive_seed(seed, t, 4))

        def make() -> Sketch:
            return make_algorithm(algorithm, cfg)

        out.append(run_reduction(setup, make, random.Random(derive_seed(seed, t, 5))))
    return out
