"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from robustcolor.avoid import AvoidInstance, avoid_lower_bound, build_covering, message_bound
from robustcolor.cli import main
from robustcolor.cubic import CubicColorer, color_universe_size
from robustcolor.experiments import (
    AttackSpec,
    make_adversary,
    reduction_trials,
    run_attack,
    separation_ratios,
    separation_trial,
    space_scaling,
    trial_seeds,
)
from robustcolor.harness import RandomAdversary, random_graph_check, run_game
from robustcolor.stream import StreamConfig
from robustcolor.switching import SwitchingColorer

pytestmark = pytest.mark.acceptance


def report(num, title, ok, detail, seconds):
    line = f"criterion {num} {'PASS' if ok else 'FAIL'} {title}: {detail} ({seconds:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def attack_cells():
    cubic = StreamConfig(n=64, m=64 * 16, L=16, seed=101)
    cells = [("cubic", adv, cubic, 512 if adv == "random" else None, 0.0) for adv in ("mono", "flood", "random")]
    for k in (2, 3):
        cfg = StreamConfig(n=128, m=8 * 128 * 16, L=16, k=k, seed=200 + k)
        for adv in ("mono", "flood", "random"):
            steps, p = (1500, 0.3) if adv == "random" else (None, 0.0)
            cells.append(("switching", adv, cfg, steps, p))
    return cells


def test_c1_robust_properness():
    t0 = time.perf_counter()
    trials, parts, ok = 300, [], True
    for alg, adv, cfg, steps, p in attack_cells():
        res = run_attack(AttackSpec(alg, adv, cfg, steps, p), trials, workers=1)
        improper = sum(s.improper for s, _ in res)
        rate = sum(s.failed for s, _ in res) / trials
        ok &= improper == 0 and rate <= 0.01
        name = alg if alg == "cubic" else f"switching-{cfg.k}"
        parts.append(f"{name}/{adv} improper={improper} fail={rate:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 300
    assert report(1, "robust properness", ok, "; ".join(parts), elapsed)


def _legal_cubic(c, delta):
    i, p = c
    return (i, p) == (0, 0) or (1 <= i <= delta and 1 <= p <= 2 * i * i)


def test_c2_color_bounds():
    t0 = time.perf_counter()
    bad_cubic = bad_switch = queries = 0
    for adv in ("mono", "flood", "random"):
        for trial in range(30):
            a_seed, d_seed = trial_seeds(300, trial)
            cfg = StreamConfig(n=64, m=64 * 16, L=16, seed=a_seed)
            tr = run_game(CubicColorer(cfg), make_adversary(adv, cfg, d_seed, 512), cfg, keep_colorings=True)
            for c, d in zip(tr.colorings, tr.query_max_degree):
                queries += 1
                distinct = len(set(c))
                if not all(_legal_cubic(x, d) for x in c) or distinct > color_universe_size(d) \
                        or (d >= 1 and distinct > 3 * d ** 3):
                    bad_cubic += 1
            cfg = StreamConfig(n=64, m=8 * 64 * 16, L=16, seed=a_seed)
            adversary = make_adversary(adv, cfg, d_seed, 1200, 0.3 if adv == "random" else 0.0)
            tr = run_game(SwitchingColorer(cfg, sketch="exact"), adversary, cfg)
            for used, d in zip(tr.colors_used, tr.query_max_degree):
                queries += 1
                bad_switch += used > (2 * d + 1) * (d + 1)
    elapsed = time.perf_counter() - t0
    ok = bad_cubic == 0 and bad_switch == 0 and elapsed <= 120
    assert report(2, "color bounds", ok, f"{queries} queries, cubic violations={bad_cubic}, "
                  f"switching violations={bad_switch}", elapsed)


def test_c3_storage_bound():
    t0 = time.perf_counter()
    n, L = 256, 32
    cap = 64 * math.log2(n) ** 3
    worst, violations = 0, 0
    for trial in range(30):
        a_seed, d_seed = trial_seeds(400, trial)
        cfg = StreamConfig(n=n, m=n * L // 2, L=L, seed=a_seed)
        alg = CubicColorer(cfg)
        run_game(alg, RandomAdversary(cfg, d_seed), cfg, query_every_token=False)
        worst = max(worst, alg.max_stored_degree())
        violations += alg.max_stored_degree() > cap
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed <= 60
    assert report(3, "oblivious storage bound", ok, f"max stored degree {worst} vs cap {cap:.0f}, "
                  f"violations={violations}", elapsed)


def test_c4_separation():
    t0 = time.perf_counter()
    rows = [r for seed in range(30) for r in separation_trial(256, 32, 500 + seed)]
    ratios = separation_ratios(rows)
    elapsed = time.perf_counter() - t0
    failed_runs = sum(r.failed for r in rows)
    ok = ratios["palette"] >= 5 and ratios["cubic"] <= 2 and failed_runs == 0 and elapsed <= 180
    assert report(4, "robust vs oblivious separation", ok,
                  f"palette flood/random={ratios['palette']:.3f} (need >=5), "
                  f"cubic flood/random={ratios['cubic']:.3f} (need <=2), failed runs={failed_runs}", elapsed)


def test_c5_space_scaling():
    t0 = time.perf_counter()
    deltas, seeds = [4, 8, 16, 32], [0, 1, 2]
    _, _, s2 = space_scaling(128, deltas, 2, seeds)
    _, _, s3 = space_scaling(128, deltas, 3, seeds)
    elapsed = time.perf_counter() - t0
    ok = 0.3 <= s2 <= 0.7 and s3 < s2 and elapsed <= 300
    assert report(5, "space scaling", ok, f"slope k=2 {s2:.3f} (need [0.3,0.7]), k=3 {s3:.3f} (need < k=2)",
                  elapsed)


def test_c6_reduction_recovery():
    t0 = time.perf_counter()
    trials = reduction_trials(64, 8, 4, 100, seed=600, algorithm="switching", k=2)
    ok_trials = [t for t in trials if t.success]
    rate = len(ok_trials) / len(trials)
    full = all(t.elements_recovered >= 8 and t.disjoint for t in ok_trials)
    bits = all(t.measured_bits >= t.lower_bound_bits for t in ok_trials)
    errors = {}
    for t in trials:
        if t.error:
            kind = t.error.split(":", 1)[0]
            errors[kind] = errors.get(kind, 0) + 1
    elapsed = time.perf_counter() - t0
    ok = rate >= 0.95 and full and bits and elapsed <= 120
    lb = trials[0].lower_bound_bits
    min_bits = min((t.measured_bits for t in ok_trials), default=0)
    assert report(6, "reduction recovery", ok,
                  f"success {rate:.2f} (need >=0.95), failures {errors or 'none'}, "
                  f"min measured bits {min_bits} vs bound {lb:.2f}", elapsed)


def test_c7_avoid_exactness():
    t0 = time.perf_counter()
    inst = AvoidInstance(12, 3, 3)
    cov = build_covering(inst, seed=7)
    verified = cov.verify()
    within = cov.message_bits <= message_bound(inst)
    rng = np.random.default_rng(700)
    bad = 0
    for _ in range(10_000):
        t = int(rng.integers(1, 500))
        a = int(rng.integers(0, t + 1))
        b = int(rng.integers(0, t - a + 1))
        k = int(rng.integers(1, 20))
        delta = float(rng.uniform(0, 0.99))
        x = AvoidInstance(t, a, b, k, delta)
        bad += avoid_lower_bound(x) < avoid_lower_bound(x, exact=False) - 1e-9
    elapsed = time.perf_counter() - t0
    ok = verified and within and bad == 0 and elapsed <= 60
    assert report(7, "AVOID exactness", ok, f"z={cov.z} verified={verified}, message {cov.message_bits} bits "
                  f"<= {message_bound(inst):.3f}: {within}, exact<relaxed on {bad}/10000", elapsed)


def test_c8_random_graph_tail():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n, M, eps in [(64, 64, 1.0), (100, 5000, 1.0), (128, 512, 0.5)]:
        try:
            res = random_graph_check(n, M, eps, 10_000, seed=800)
        except ValueError as exc:
            ok = False
            parts.append(f"({n},{M},{eps}) invalid: {exc}")
            continue
        lo, hi = res.wilson
        ok &= res.consistent
        parts.append(f"({n},{M},{eps}) freq={res.frequency:.4f} wilson99=[{lo:.4f},{hi:.4f}] "
                     f"bound={res.bound:.4g}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 60
    assert report(8, "random-graph max-degree tail", ok, "; ".join(parts), elapsed)


def test_c9_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    stream = tmp_path / "s.txt"
    rng = random.Random(900)
    from conftest import random_turnstile
    from robustcolor.stream import format_stream

    toks, _ = random_turnstile(20, 120, 5, 900)
    stream.write_text(format_stream(toks))
    configs = {
        "attack": ["attack", "--algorithm", "switching-3", "--adversary", "flood", "--n", "32", "--L", "6",
                   "--trials", "3", "--seed", str(rng.randrange(10**6))],
        "replay": ["replay", "--stream", str(stream), "--algorithm", "palette", "--n", "20", "--L", "5",
                   "--seed", "4"],
        "avoid-demo": ["avoid-demo", "--n", "32", "--K", "4", "--L", "4", "--trials", "5", "--seed", "9"],
    }
    same = {}
    for name, argv in configs.items():
        outs = []
        for run in range(2):
            target = tmp_path / f"{name}{run}"
            extra = ["--out", str(target) if name == "attack" else str(target) + ".csv"]
            assert main(argv + extra) == 0
            if name == "attack":
                outs.append(b"".join(p.read_bytes() for p in sorted(target.iterdir())))
            else:
                outs.append((tmp_path / f"{name}{run}.csv").read_bytes())
        same[name] = outs[0] == outs[1] and len(outs[0]) > 0
    capsys.readouterr()
    elapsed = time.perf_counter() - t0
    ok = all(same.values()) and elapsed <= 60
    assert report(9, "determinism", ok, ", ".join(f"{k} identical={v}" for k, v in same.items()), elapsed)
