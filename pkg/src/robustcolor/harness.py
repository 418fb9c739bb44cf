"""Solver-vs-adversary game runner, adversary suite, and Monte Carlo checks.

An adversary is a deterministic function of the coloring history (plus its
own fixed seed).  The runner keeps the ground-truth graph, enforces the
strict-turnstile and degree promises, and judges every coloring itself.
"""

from __future__ import annotations

import csv
import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .sketches import AlgorithmFailure, Sketch
from .stream import (
    Coloring,
    EdgeToken,
    GroundTruthGraph,
    Op,
    StreamConfig,
    StrictTurnstileViolation,
    count_colors,
    delete,
    insert,
    is_proper,
)


class AdversaryFault(RuntimeError):
    """The adversary broke an input promise; not an algorithm failure."""


class Adversary(ABC):
    @abstractmethod
    def next_token(self, history: Sequence[Coloring]) -> EdgeToken | None:
        """Next token given all colorings so far, or None to stop."""


class _MirrorMixin:
    """Tracks the graph built from this adversary's own emitted tokens."""

    def _init_mirror(self, cfg: StreamConfig):
        self.cfg = cfg
        self.graph = GroundTruthGraph(cfg.n)

    def _emit(self, tok: EdgeToken) -> EdgeToken:
        self.graph.apply(tok)
        return tok


class MonochromaticAdversary(_MirrorMixin, Adversary):
    """Insert the lexicographically smallest like-colored non-adjacent pair."""

    def __init__(self, cfg: StreamConfig, seed: int = 0):
        self._init_mirror(cfg)

    def next_token(self, history):
        if not history:
            return None
        c = history[-1]
        g, L = self.graph, self.cfg.L
        deg, adj = g.degrees, g.adj
        classes: dict = {}
        for v in range(g.n):
            if deg[v] < L:
                classes.setdefault(c[v], []).append(v)
        best = None
        for members in classes.values():
            for i, u in enumerate(members):
                if best is not None and u >= best[0]:
                    break
                nb = adj[u]
                for w in members[i + 1:]:
                    if w not in nb:
                        if best is None or (u, w) < best:
                            best = (u, w)
                        break
                else:
                    continue
                break
        return None if best is None else self._emit(insert(*best))


class ConflictFloodAdversary(_MirrorMixin, Adversary):
    """Insert like-colored pairs, preferring low-degree endpoints.

    Against a palette sketch, two vertices sharing a queried color have
    intersecting lists at the queried level, so each such edge is a stored
    conflict edge.  Keeping degrees low maximizes how many such edges fit
    under the degree bound.  Ties go to the lexicographically smallest pair,
    so the opening move matches the monochromatic adversary.
    """

    def __init__(self, cfg: StreamConfig, seed: int = 0):
        self._init_mirror(cfg)

    def next_token(self, history):
        if not history:
            return None
        c = history[-1]
        g, L = self.graph, self.cfg.L
        deg, adj = g.degrees, g.adj
        classes: dict = {}
        for v in range(g.n):
            if deg[v] < L:
                classes.setdefault(c[v], []).append(v)
        best_d, best_pair = L + 1, None
        for members in classes.values():
            if len(members) < 2:
                continue
            by_deg = sorted(members, key=deg.__getitem__)
            # smallest achievable max-degree within this class
            d = None
            for j in range(1, len(by_deg)):
                w = by_deg[j]
                if deg[w] > best_d:
                    break
                nb = adj[w]
                if any(u not in nb for u in by_deg[:j]):
                    d = deg[w]
                    break
            if d is None:
                continue
            # lexicographically smallest pair in the class attaining it
            low = [x for x in members if deg[x] <= d]
            pair = None
            for i, a in enumerate(low):
                if pair is not None and a >= pair[0]:
                    break
                nb = adj[a]
                for b in low[i + 1:]:
                    if (deg[a] == d or deg[b] == d) and b not in nb:
                        pair = (a, b)
                        break
            if d < best_d or pair < best_pair:
                best_d, best_pair = d, pair
        best = None if best_pair is None else (best_d,) + best_pair
        return None if best is None else self._emit(insert(best[1], best[2]))


class RandomAdversary(_MirrorMixin, Adversary):
    """Oblivious random stream: ignores the colorings it is shown.

    Inserts a uniformly random absent edge between vertices below the degree
    bound, or (with probability ``delete_prob`` when edges exist) deletes a
    uniformly random present edge.  Stops after ``steps`` tokens.
    """

    def __init__(self, cfg: StreamConfig, seed: int = 0, steps: int | None = None,
                 delete_prob: float = 0.0):
        self._init_mirror(cfg)
        self.rng = random.Random(seed)
        self.steps = cfg.m if steps is None else min(steps, cfg.m)
        self.delete_prob = delete_prob
        self.emitted = 0
        self.edges: list[tuple[int, int]] = []
        self.pos: dict[tuple[int, int], int] = {}

    def _random_insert(self):
        g, L, rng, n = self.graph, self.cfg.L, self.rng, self.cfg.n
        for _ in range(64):
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v and g.degrees[u] < L and g.degrees[v] < L and not g.has_edge(u, v):
                return (min(u, v), max(u, v))
        open_ = [x for x in range(n) if g.degrees[x] < L]
        pairs = [(u, v) for i, u in enumerate(open_) for v in open_[i + 1:] if not g.has_edge(u, v)]
        return rng.choice(pairs) if pairs else None

    def next_token(self, history):
        if self.emitted >= self.steps:
            return None
        rng = self.rng
        if self.edges and rng.random() < self.delete_prob:
            e = self.edges[rng.randrange(len(self.edges))]
            self._drop(e)
            tok = delete(*e)
        else:
            e = self._random_insert()
            if e is None:
                if not self.edges or self.delete_prob == 0:
                    return None
                e = self.edges[rng.randrange(len(self.edges))]
                self._drop(e)
                tok = delete(*e)
            else:
                self.pos[e] = len(self.edges)
                self.edges.append(e)
                tok = insert(*e)
        self.emitted += 1
        return self._emit(tok)

    def _drop(self, e):
        i = self.pos.pop(e)
        last = self.edges.pop()
        if last != e:
            self.edges[i] = last
            self.pos[last] = i


class FileAdversary(Adversary):
    """Replays a fixed token list."""

    def __init__(self, tokens: Sequence[EdgeToken]):
        self.tokens = list(tokens)
        self.i = 0

    def next_token(self, history):
        if self.i >= len(self.tokens):
            return None
        self.i += 1
        return self.tokens[self.i - 1]


def monochromatic_adversary(cfg, seed=0):
    return MonochromaticAdversary(cfg, seed)


def conflict_flood_adversary(cfg, seed=0):
    return ConflictFloodAdversary(cfg, seed)


class StaticModColorer(Sketch):
    """Non-robust toy: vertex v always gets color v mod K."""

    def __init__(self, cfg: StreamConfig, K: int):
        self.cfg, self.K = cfg, K

    def process(self, token):
        pass

    def query(self):
        return tuple((v % self.K,) for v in range(self.cfg.n))

    def space_proxy(self):
        return 0

    def to_bytes(self, include_seed=True):
        return b""


# -- the game -------------------------------------------------------------------

@dataclass
class Failure:
    step: int
    error: str


@dataclass
class GameTranscript:
    tokens: list[EdgeToken] = field(default_factory=list)
    colorings: list[Coloring] = field(default_factory=list)
    queried: list[bool] = field(default_factory=list)
    proper_flags: list[bool] = field(default_factory=list)
    colors_used: list[int] = field(default_factory=list)
    query_max_degree: list[int] = field(default_factory=list)
    space_proxy_samples: list[int] = field(default_factory=list)
    max_degree_trace: list[int] = field(default_factory=list)
    failures: list[Failure] = field(default_factory=list)
    events: list[str] = field(default_factory=list)

    @property
    def improper_count(self) -> int:
        return sum(1 for f in self.proper_flags if not f)

    @property
    def failed(self) -> bool:
        return bool(self.failures)

    def rows(self, include_initial: bool = True):
        """One CSV row per step; step 0 is the query before the first token."""
        q = 0
        for step in range(len(self.tokens) + 1):
            if step == 0:
                op, u, v = "", "", ""
            else:
                t = self.tokens[step - 1]
                op, u, v = t.op.value, t.u, t.v
            queried = self.queried[step] if step < len(self.queried) else False
            proper = colors = ""
            if queried:
                proper = int(self.proper_flags[q])
                colors = self.colors_used[q]
                q += 1
            space = self.space_proxy_samples[step] if step < len(self.space_proxy_samples) else ""
            event = self.events[step] if step < len(self.events) else ""
            if step == 0 and not include_initial:
                continue
            yield [step, op, u, v, int(queried), proper, colors, space, event]


CSV_HEADER = ["step", "op", "u", "v", "queried", "proper", "colorsUsed", "spaceProxy", "event"]


def write_transcript_csv(tr: GameTranscript, path, include_initial: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(tr.rows(include_initial))


class ProperTracker:
    """Exact properness of successive colorings of an evolving graph.

    If the previous coloring was proper on the previous graph, the new one
    can only be improper on an edge that is new or touches a vertex whose
    color changed, so only those edges are rechecked.  Otherwise falls back
    to a full scan.
    """

    def __init__(self, g: GroundTruthGraph):
        self.g = g
        self.prev: Coloring | None = None
        self.prev_ok = False
        self.pending: list[tuple[int, int]] = []

    def inserted(self, u: int, v: int) -> None:
        self.pending.append((u, v))

    def check(self, c: Coloring) -> bool:
        g, prev = self.g, self.prev
        if prev is None or not self.prev_ok or len(prev) != len(c):
            ok = is_proper(c, g)
        else:
            if len(c) != g.n:
                raise ValueError("coloring length does not match the graph")
            ok = True
            for u, v in self.pending:
                if g.has_edge(u, v) and c[u] == c[v]:
                    ok = False
                    break
            if ok:
                adj = g.adj
                changed = [x for x, a, b in zip(range(g.n), c, prev) if a is not b and a != b]
                for x in changed:
                    a = c[x]
                    if any(c[w] == a for w in adj[x]):
                        ok = False
                        break
        self.pending.clear()
        self.prev, self.prev_ok = c, ok
        return ok


def run_game(alg: Sketch, adv: Adversary, cfg: StreamConfig, query_every_token: bool = True,
             keep_colorings: bool = False) -> GameTranscript:
    """Play ``adv`` against ``alg`` until the adversary stops or the algorithm fails.

    Raises AdversaryFault when a token breaks strict-turnstile validity, the
    degree bound L, or the token budget m.
    """
    tr = GameTranscript()
    g = GroundTruthGraph(cfg.n)
    history: list[Coloring] = []
    tracker = ProperTracker(g)

    def judge(step: int) -> bool:
        try:
            c = alg.query()
        except AlgorithmFailure as exc:
            tr.failures.append(Failure(step, f"{type(exc).__name__}: {exc}"))
            tr.queried.append(False)
            tr.events[-1] = "FAIL"
            return False
        tr.queried.append(True)
        tr.proper_flags.append(tracker.check(c))
        tr.colors_used.append(count_colors(c))
        tr.query_max_degree.append(g.max_degree)
        if keep_colorings:
            tr.colorings.append(c)
        history.append(c)
        if not tr.proper_flags[-1]:
            tr.events[-1] = "IMPROPER"
        return True

    tr.events.append("")
    tr.space_proxy_samples.append(alg.space_proxy())
    tr.max_degree_trace.append(0)
    if not judge(0):
        return tr
    step = 0
    while True:
        tok = adv.next_token(history if query_every_token else history[:1])
        if tok is None:
            break
        step += 1
        if step > cfg.m:
            raise AdversaryFault(f"step {step}: token budget m={cfg.m} exceeded")
        try:
            g.check(tok)
        except StrictTurnstileViolation as exc:
            raise AdversaryFault(f"step {step}: {exc}") from None
        if tok.op is Op.INSERT and max(g.degrees[tok.u], g.degrees[tok.v]) + 1 > cfg.L:
            raise AdversaryFault(f"step {step}: edge {{{tok.u},{tok.v}}} exceeds degree bound L={cfg.L}")
        g.apply(tok)
        if tok.op is Op.INSERT:
            tracker.inserted(tok.u, tok.v)
        tr.tokens.append(tok)
        tr.events.append("")
        tr.max_degree_trace.append(g.max_degree)
        try:
            alg.process(tok)
        except AlgorithmFailure as exc:
            tr.failures.append(Failure(step, f"{type(exc).__name__}: {exc}"))
            tr.queried.append(False)
            tr.space_proxy_samples.append(alg.space_proxy())
            tr.events[-1] = "FAIL"
            return tr
        tr.space_proxy_samples.append(alg.space_proxy())
        if query_every_token:
            if not judge(step):
                return tr
        else:
            tr.queried.append(False)
    if not query_every_token and step > 0:
        # one final query so that oblivious runs still get judged
        tr.queried.pop()
        judge(step)
    return tr


# -- random graphs ------------------------------------------------------------------

def max_degree_tail_bound(n: int, M: int, eps: float) -> float:
    """2n·exp(-(ε²/3)·(2M/n)): bound on Pr[Δ_G ≥ (2M/n)(1+ε)] for uniform M-edge graphs."""
    return 2 * n * math.exp(-(eps ** 2 / 3) * (2 * M / n))


def wilson_interval(successes: int, trials: int, z: float = 2.5758293035489) -> tuple[float, float]:
    """Wilson score interval; the default z gives 99% two-sided coverage."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


@dataclass
class RandomGraphResult:
    n: int
    M: int
    eps: float
    trials: int
    hits: int
    bound: float

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.trials)

    @property
    def consistent(self) -> bool:
        """Observed rate is not significantly above the bound at 99%."""
        return self.wilson[0] <= self.bound


def random_graph_check(n: int, M: int, eps: float, trials: int, seed: int = 0) -> RandomGraphResult:
    """Monte Carlo estimate of Pr[Δ_G ≥ (2M/n)(1+ε)] over uniform M-edge graphs on n vertices."""
    N = n * (n - 1) // 2
    if not 0 <= M <= N:
        raise ValueError(f"M={M} edges do not fit in a simple graph on n={n} vertices (max {N})")
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    threshold = (2 * M / n) * (1 + eps)
    hits = 0
    for _ in range(trials):
        idx = rng.choice(N, size=M, replace=False)
        deg = np.bincount(iu[idx], minlength=n) + np.bincount(ju[idx], minlength=n)
        if M and deg.max() >= threshold - 1e-12:
            hits += 1
        elif M == 0 and threshold <= 0:
            hits += 1
    return RandomGraphResult(n, M, eps, trials, hits, max_degree_tail_bound(n, M, eps))
