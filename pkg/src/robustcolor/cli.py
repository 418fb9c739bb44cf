"""Command-line entry point: ``robustcolor <command> [flags]``.

Exit codes: 0 success, 2 validation error, 3 experiment-level failure
(an --assert threshold was violated).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .avoid import TRIAL_HEADER, AvoidInstance, avoid_lower_bound
from .experiments import (
    ADVERSARIES,
    AttackSpec,
    SeparationRow,
    SpaceRow,
    TrialSummary,
    parse_algorithm,
    reduction_trials,
    run_attack,
    separation_ratios,
    separation_trial,
    space_scaling,
    worker_count,
)
from .harness import AdversaryFault, CSV_HEADER, random_graph_check, run_game, write_transcript_csv
from .stream import GroundTruthGraph, StreamConfig, StreamParseError, StrictTurnstileViolation, read_stream

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


class ValidationError(ValueError):
    pass


# flag name -> (type, default); flags default to None so a config file can fill gaps
DEFAULTS = {
    "algorithm": (str, "cubic"),
    "adversary": (str, "mono"),
    "n": (int, 64),
    "m": (int, None),
    "L": (int, 16),
    "k": (int, 2),
    "delta": (float, 0.01),
    "seed": (int, 0),
    "trials": (int, 1),
    "steps": (int, None),
    "delete_prob": (float, 0.0),
    "sketch": (str, "palette"),
    "stream": (str, None),
    "out": (str, None),
    "query_every_token": (bool, True),
    "assert": (bool, False),
    "t": (int, None),
    "a": (int, None),
    "b": (int, None),
    "exact": (bool, False),
    "M": (int, None),
    "eps": (float, None),
    "K": (int, 8),
    "deltas": (str, "4,8,16,32"),
    "seeds": (int, 3),
    "slope_min": (float, 0.3),
    "slope_max": (float, 0.7),
}


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """Key-value file: ``key = value`` per line, ``#`` comments; keys are flag names."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {path}")
    out = {}
    for no, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{no}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ValidationError(f"{path}:{no}: unknown key {key!r}")
        typ = DEFAULTS[key][0]
        try:
            out[key] = _bool(val) if typ is bool else typ(val)
        except ValueError:
            raise ValidationError(f"{path}:{no}: bad value for {key}: {val!r}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robustcolor", description="Robust streaming coloring experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *names):
        sp.add_argument("--config", help="key = value file; flags override it")
        for name in names:
            flag = "--" + name.replace("_", "-")
            typ = DEFAULTS[name][0]
            if typ is bool:
                sp.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
            else:
                sp.add_argument(flag, dest=name, type=typ, default=None)

    stream_flags = ("n", "m", "L", "k", "delta", "seed")
    common(sub.add_parser("attack", help="play an adversary against an algorithm"),
           "algorithm", "adversary", *stream_flags, "trials", "steps", "delete_prob", "sketch", "stream",
           "out", "query_every_token", "assert")
    common(sub.add_parser("bench-space", help="peak space vs max degree for insert-only switching"),
           "n", "k", "seed", "seeds", "deltas", "sketch", "out", "assert", "slope_min", "slope_max")
    common(sub.add_parser("separation", help="stored edges: flood attack vs oblivious stream"),
           "n", "L", "seed", "trials", "steps", "out")
    common(sub.add_parser("avoid-demo", help="end-to-end coloring reduction trials"),
           "algorithm", "n", "K", "L", "k", "seed", "trials", "out", "assert")
    common(sub.add_parser("avoid-bounds", help="communication lower bound for AVOID^k(t,a,b)"),
           "t", "a", "b", "k", "delta", "exact")
    common(sub.add_parser("random-graph-check", help="Monte Carlo max-degree tail for random graphs"),
           "n", "M", "eps", "trials", "seed", "out", "assert")
    common(sub.add_parser("validate", help="check a stream file's syntax and promises"), "stream", "n", "L")
    common(sub.add_parser("replay", help="run an algorithm over a stream file"),
           "stream", "algorithm", "n", "m", "L", "k", "delta", "seed", "sketch", "out", "query_every_token")
    return p


# per-command defaults that differ from DEFAULTS
COMMAND_DEFAULTS = {"validate": {"n": None, "L": None}, "avoid-bounds": {"k": 1, "delta": 0.0}}


def resolve(ns: argparse.Namespace) -> argparse.Namespace:
    """Flags > config file > defaults."""
    cfg = read_config(ns.config) if getattr(ns, "config", None) else {}
    local = COMMAND_DEFAULTS.get(ns.command, {})
    for key, (_, default) in DEFAULTS.items():
        if not hasattr(ns, key):
            continue
        if getattr(ns, key) is None:
            setattr(ns, key, cfg.get(key, local.get(key, default)))
    return ns


def _require(ns, *names):
    missing = [n for n in names if getattr(ns, n) is None]
    if missing:
        raise ValidationError("missing required flag(s): " + ", ".join("--" + m for m in missing))


def _stream_config(ns, m_default: int) -> StreamConfig:
    try:
        return StreamConfig(n=ns.n, m=ns.m if ns.m is not None else m_default, L=ns.L, k=ns.k,
                            delta=ns.delta, seed=ns.seed)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _load_tokens(path: str) -> list:
    try:
        return [tok for _, tok in read_stream(path)]
    except FileNotFoundError:
        raise ValidationError(f"stream file not found: {path}") from None
    except StreamParseError as exc:
        raise ValidationError(str(exc)) from None


def cmd_attack(ns) -> int:
    algorithm, k = parse_algorithm(ns.algorithm, ns.k)
    ns.k = k
    if ns.adversary not in ADVERSARIES:
        raise ValidationError(f"unknown adversary {ns.adversary!r}; choose from {', '.join(ADVERSARIES)}")
    if ns.trials < 1:
        raise ValidationError("--trials must be at least 1")
    if not 0 <= ns.delete_prob < 1:
        raise ValidationError("--delete-prob must lie in [0, 1)")
    if algorithm == "cubic" and ns.delete_prob > 0:
        raise ValidationError("the cubic colorer is insert-only; use --delete-prob 0")
    if ns.steps is not None and ns.steps < 0:
        raise ValidationError("--steps must be non-negative")
    tokens = None
    if ns.adversary == "file":
        _require(ns, "stream")
        tokens = tuple(_load_tokens(ns.stream))
    cfg = _stream_config(ns, ns.n * ns.L if tokens is None else max(1, len(tokens)))
    spec = AttackSpec(algorithm, ns.adversary, cfg, ns.steps, ns.delete_prob, ns.query_every_token,
                      ns.sketch, tokens)
    out = Path(ns.out) if ns.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    def report(summary: TrialSummary, tr) -> None:
        print(summary.line())
        if out:
            write_transcript_csv(tr, out / f"trial_{summary.trial:04d}.csv")

    try:
        results = run_attack(spec, ns.trials, report)
    except AdversaryFault as exc:
        print(f"adversary fault: {exc}", file=sys.stderr)
        return EXIT_INVALID
    summaries = [s for s, _ in results]
    if out:
        _write_csv(out / "summary.csv", TrialSummary.HEADER, [s.row() for s in summaries])
    improper = sum(s.improper for s in summaries)
    fails = sum(s.failed for s in summaries)
    rate = fails / len(summaries)
    print(f"summary: trials {len(summaries)} improper {improper} failed {fails} failRate {rate:.4f}")
    if ns.assert_ and (improper > 0 or rate > cfg.delta):
        print(f"assertion failed: improper={improper}, fail rate {rate:.4f} > delta {cfg.delta}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_bench_space(ns) -> int:
    try:
        deltas = [int(x) for x in str(ns.deltas).split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"--deltas must be comma-separated integers, got {ns.deltas!r}") from None
    if len(deltas) < 2 or any(d < 1 or d > ns.n - 1 for d in deltas):
        raise ValidationError("--deltas needs at least two values in [1, n-1]")
    if ns.seeds < 1 or ns.k < 1:
        raise ValidationError("--seeds and --k must be at least 1")
    seeds = [ns.seed + i for i in range(ns.seeds)]
    rows, means, slope = space_scaling(ns.n, deltas, ns.k, seeds, ns.sketch)
    for d, mu in zip(deltas, means):
        print(f"k={ns.k} n={ns.n} Delta={d} meanPeakSpace={mu:.1f}")
    print(f"slope {slope:.4f}")
    if ns.out:
        _write_csv(ns.out, SpaceRow.HEADER, [r.row() for r in rows])
    if ns.assert_ and not ns.slope_min <= slope <= ns.slope_max:
        print(f"assertion failed: slope {slope:.4f} outside [{ns.slope_min}, {ns.slope_max}]", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_separation(ns) -> int:
    try:
        StreamConfig(n=ns.n, m=1, L=ns.L)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    rows = []
    for t in range(ns.trials):
        rows.extend(separation_trial(ns.n, ns.L, ns.seed + t, ns.steps))
    for target, ratio in separation_ratios(rows).items():
        print(f"{target}: flood/random stored-edge ratio {ratio:.3f}")
    if ns.out:
        _write_csv(ns.out, SeparationRow.HEADER, [r.row() for r in rows])
    return EXIT_OK


def cmd_avoid_demo(ns) -> int:
    algorithm, k = parse_algorithm(ns.algorithm, ns.k)
    if ns.trials < 1:
        raise ValidationError("--trials must be at least 1")
    try:
        trials = reduction_trials(ns.n, ns.K, ns.L, ns.trials, ns.seed, algorithm, k)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    for i, t in enumerate(trials):
        extra = f" ({t.error})" if t.error else ""
        print(f"trial {i:4d} bytes {t.bytes_sent} recovered {t.elements_recovered} "
              f"success {int(t.success)}{extra}")
    if ns.out:
        _write_csv(ns.out, TRIAL_HEADER, [t.row() for t in trials])
    ok = [t for t in trials if t.success]
    rate = len(ok) / len(trials)
    bound_ok = all(t.measured_bits >= t.lower_bound_bits for t in ok)
    print(f"summary: success rate {rate:.3f}, communication >= bound on all successes: {bound_ok}")
    if ns.assert_ and (rate < 0.95 or not bound_ok):
        return EXIT_FAILED
    return EXIT_OK


def cmd_avoid_bounds(ns) -> int:
    _require(ns, "t", "a", "b")
    try:
        inst = AvoidInstance(ns.t, ns.a, ns.b, ns.k, ns.delta)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    print(f"{avoid_lower_bound(inst, exact=ns.exact):.4f}")
    return EXIT_OK


def cmd_random_graph_check(ns) -> int:
    _require(ns, "M", "eps")
    if ns.trials < 1:
        raise ValidationError("--trials must be at least 1")
    try:
        res = random_graph_check(ns.n, ns.M, ns.eps, ns.trials, ns.seed)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    lo, hi = res.wilson
    print(f"n={res.n} M={res.M} eps={res.eps} trials={res.trials} hits={res.hits} "
          f"freq={res.frequency:.6g} wilson99=[{lo:.6g},{hi:.6g}] bound={res.bound:.6g} "
          f"consistent={res.consistent}")
    if ns.out:
        _write_csv(ns.out, ["n", "M", "eps", "trials", "hits", "frequency", "wilsonLow", "wilsonHigh", "bound"],
                   [[res.n, res.M, res.eps, res.trials, res.hits, f"{res.frequency:.6g}",
                     f"{lo:.6g}", f"{hi:.6g}", f"{res.bound:.6g}"]])
    if ns.assert_ and not res.consistent:
        return EXIT_FAILED
    return EXIT_OK


def cmd_validate(ns) -> int:
    _require(ns, "stream")
    try:
        pairs = read_stream(ns.stream)
    except FileNotFoundError:
        raise ValidationError(f"stream file not found: {ns.stream}") from None
    except StreamParseError as exc:
        raise ValidationError(str(exc)) from None
    n = ns.n if ns.n is not None else 1 + max((t.v for _, t in pairs), default=1)
    g = GroundTruthGraph(max(n, 2))
    for line_no, tok in pairs:
        if tok.v >= g.n:
            raise ValidationError(f"line {line_no}: vertex {tok.v} out of range for n={g.n}")
        try:
            g.apply(tok)
        except StrictTurnstileViolation as exc:
            raise ValidationError(f"line {line_no}: {exc}") from None
        if ns.L is not None and g.max_degree > ns.L:
            raise ValidationError(f"line {line_no}: max degree {g.max_degree} exceeds L={ns.L}")
    print(f"ok: {len(pairs)} tokens, n={g.n}, final edges {g.edge_count}, final max degree {g.max_degree}")
    return EXIT_OK


def cmd_replay(ns) -> int:
    _require(ns, "stream")
    algorithm, k = parse_algorithm(ns.algorithm, ns.k)
    ns.k = k
    tokens = _load_tokens(ns.stream)
    top = max((t.v for t in tokens), default=0)
    if top >= ns.n:
        raise ValidationError(f"stream uses vertex {top} but n={ns.n}")
    cfg = _stream_config(ns, max(1, len(tokens)))
    from .experiments import make_adversary, make_algorithm

    alg = make_algorithm(algorithm, cfg, ns.sketch)
    try:
        tr = run_game(alg, make_adversary("file", cfg, 0, tokens=tokens), cfg, ns.query_every_token)
    except AdversaryFault as exc:
        raise ValidationError(str(exc)) from None
    # one row per token; the pre-stream query is not part of a replay
    if ns.out:
        write_transcript_csv(tr, ns.out, include_initial=False)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(tr.rows(include_initial=False))
    return EXIT_OK


COMMANDS = {
    "attack": cmd_attack,
    "bench-space": cmd_bench_space,
    "separation": cmd_separation,
    "avoid-demo": cmd_avoid_demo,
    "avoid-bounds": cmd_avoid_bounds,
    "random-graph-check": cmd_random_graph_check,
    "validate": cmd_validate,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        ns = resolve(ns)
        if hasattr(ns, "assert"):
            ns.assert_ = getattr(ns, "assert")
        worker_count()
        return COMMANDS[ns.command](ns)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
