"""Sketch-switching colorers for turnstile streams.

``SwitchingColorer`` with ``k=2`` is the O(Δ²)-coloring in Õ(√(nm)) space;
larger ``k`` gives the multi-level O(Δᵏ) scheme with fixed, ad-hoc and
vacuous checkpoints.  Any oblivious sketch can be plugged in.

Level-i sketches see the substream since the last level-(i-1) checkpoint.
Sketch pools can be materialized eagerly (every sketch processes every
token, as written) or lazily: only the next fresh sketch of each pool is kept
live, and later sketches are rebuilt on demand by replaying the pool's token
log.  A sketch's state is a deterministic function of its seed and the tokens
it has processed, so both modes query identical states.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .prf import derive_seed
from .sketches import AlgorithmFailure, Sketch, make_sketch
from .stream import (
    Coloring,
    EdgeToken,
    GroundTruthGraph,
    Op,
    StreamConfig,
    constant_coloring,
    pack_words,
    product_coloring,
)

FIXED, ADHOC, VACUOUS = "fixed", "adhoc", "vacuous"


class SketchesExhausted(AlgorithmFailure):
    pass


class RetiredSketchError(RuntimeError):
    """A sketch whose output was exposed was asked to process another token."""


@dataclass
class CheckpointRecord:
    kind: str
    coloring: Coloring
    max_deg: int
    step: int


@dataclass
class CheckpointEvent:
    step: int
    level: int
    kind: str
    source: str  # "process" or "query"
    max_deg: int
    sketch_index: int | None = None


@dataclass
class PooledSketch:
    sketch: Sketch
    index: int
    processed: int = 0
    retired: bool = False

    def feed(self, token: EdgeToken) -> None:
        if self.retired:
            raise RetiredSketchError(f"sketch {self.index} was already queried")
        self.sketch.process(token)
        self.processed += 1


@dataclass
class SketchPool:
    level: int
    size: int
    factory: object
    base_seed: int
    eager: bool
    epoch: int = 0
    cursor: int = 0
    log: list[EdgeToken] = field(default_factory=list)
    live: dict[int, PooledSketch] = field(default_factory=dict)
    materialized: int = 0

    def __post_init__(self):
        self.reinit()

    def seed_for(self, index: int) -> int:
        return derive_seed(self.base_seed, self.level, self.epoch, index)

    def _build(self, index: int) -> PooledSketch:
        ps = PooledSketch(self.factory(self.seed_for(index)), index)
        self.materialized += 1
        return ps

    def reinit(self, bump_epoch: bool = False) -> None:
        if bump_epoch:
            self.epoch += 1
        self.cursor = 0
        self.log = []
        self.live = {}
        if self.eager:
            for i in range(self.size):
                self.live[i] = self._build(i)
        elif self.size > 0:
            self.live[0] = self._build(0)

    def feed(self, token: EdgeToken) -> None:
        if not self.eager:
            self.log.append(token)
        for ps in self.live.values():
            ps.feed(token)

    def take_fresh(self) -> PooledSketch:
        """Retire and return the next never-queried sketch."""
        idx = self.cursor
        if idx >= self.size:
            raise SketchesExhausted(f"level {self.level}: all {self.size} sketches used")
        ps = self.live.pop(idx, None)
        if ps is None:
            ps = self._build(idx)
            for tok in self.log:
                ps.feed(tok)
        ps.retired = True
        self.cursor += 1
        if not self.eager and self.cursor < self.size and self.cursor not in self.live:
            nxt = self._build(self.cursor)
            for tok in self.log:
                nxt.feed(tok)
            self.live[self.cursor] = nxt
        return ps

    def space_proxy(self) -> int:
        remaining = self.size - self.cursor
        if remaining <= 0:
            return 0
        if self.eager:
            return sum(ps.sketch.space_proxy() for ps in self.live.values())
        # lazy: unbuilt sketches saw the same tokens as the live lead sketch
        lead = self.live.get(self.cursor)
        return remaining * (lead.sketch.space_proxy() if lead else 0)

    def materialize_all(self) -> None:
        for i in range(self.cursor, self.size):
            if i not in self.live:
                ps = self._build(i)
                for tok in self.log:
                    ps.feed(tok)
                self.live[i] = ps


def pool_size(cfg: StreamConfig, k: int, C: float, insert_only: bool) -> int:
    d = max(cfg.m / cfg.n, 1.0)
    logn = math.log2(cfg.n)
    if insert_only:
        # no ad-hoc checkpoints on insert-only streams
        return max(1, math.ceil(C * d ** (1 / k)))
    if k == 2:
        return max(1, math.ceil(C * math.sqrt(d) * logn))
    return max(1, math.ceil(C * d ** (1 / k) * (k * logn) ** k))


def chunk_sizes(cfg: StreamConfig, k: int) -> list[int]:
    """Token counts of level-1 .. level-(k-1) chunks."""
    d = max(cfg.m / cfg.n, 1.0)
    return [max(1, math.ceil(cfg.n * d ** ((k - i) / k))) for i in range(1, k)]


class SwitchingColorer(Sketch):
    """Robust O(Δᵏ)-coloring by sketch switching.

    Args:
        cfg: stream parameters; ``cfg.k`` is the tradeoff exponent.
        sketch: inner oblivious sketch, "palette" or "exact".
        C: pool-size constant.
        insert_only: size pools for insert-only streams (deletions rejected).
        materialize: "lazy" or "eager" sketch pools.
    """

    def __init__(self, cfg: StreamConfig, sketch: str = "palette", C: float = 4.0,
                 insert_only: bool = False, materialize: str = "lazy", **sketch_kwargs):
        if materialize not in ("lazy", "eager"):
            raise ValueError("materialize must be 'lazy' or 'eager'")
        self.cfg = cfg
        self.k = k = cfg.k
        self.sketch_kind = sketch
        self.insert_only = insert_only
        self.eps = 1 / (2 * k)
        # factor-2 trigger for the two-level scheme, (1+ε) for k >= 3
        self.trigger = 2.0 if k == 2 else 1 + self.eps
        self.levels = k - 1
        self.chunk = chunk_sizes(cfg, k)
        self.s = pool_size(cfg, k, C, insert_only)
        n = cfg.n

        def factory(seed: int) -> Sketch:
            return make_sketch(sketch, cfg, seed, **sketch_kwargs)

        self.pools = [SketchPool(i, self.s, factory, derive_seed(cfg.seed, 0xB00), materialize == "eager")
                      for i in range(1, k)]
        empty = constant_coloring(n)
        self.records = [CheckpointRecord(VACUOUS, empty, 0, 0) for _ in range(self.levels)]
        self.counters = [0] * self.levels
        self._deg = [0] * n
        self._hist = [n]
        self.max_deg = 0
        self.buffer = GroundTruthGraph(n, strict=False)
        self.buf_color = [1] * n
        self._buf_tuples = [(1,)] * n
        self._combined: list | None = None  # records product x buffer colors, per vertex
        self.step = 0
        self.negative_edges = 0
        self.events: list[CheckpointEvent] = []
        self.peak_space = self.space_proxy()

    # -- degree bookkeeping ---------------------------------------------------

    def _bump(self, x: int, step: int) -> None:
        d = self._deg[x]
        self._hist[d] -= 1
        d += step
        if d == len(self._hist):
            self._hist.append(0)
        self._hist[d] += 1
        self._deg[x] = d
        if d > self.max_deg:
            self.max_deg = d
        while self.max_deg > 0 and self._hist[self.max_deg] == 0:
            self.max_deg -= 1

    # -- checkpoints ------------------------------------------------------------

    def _checkpoint(self, level: int, kind: str, source: str) -> None:
        """Fixed or ad-hoc checkpoint at ``level`` (1-based)."""
        i = level - 1
        ps = self.pools[i].take_fresh()
        coloring = ps.sketch.query()
        self.records[i] = CheckpointRecord(kind, coloring, self.max_deg, self.step)
        self.events.append(CheckpointEvent(self.step, level, kind, source, self.max_deg, ps.index))
        empty = constant_coloring(self.cfg.n)
        for j in range(i + 1, self.levels):
            self.records[j] = CheckpointRecord(VACUOUS, empty, 0, self.step)
            self.pools[j].reinit(bump_epoch=True)
            self.counters[j] = 0
        if kind == FIXED:
            self.counters[i] = 0
        self.buffer = GroundTruthGraph(self.cfg.n, strict=False)
        self.buf_color = [1] * self.cfg.n
        self._buf_tuples = [(1,)] * self.cfg.n
        self._combined = None

    def _recolor_buffer(self, x: int) -> None:
        """Smallest color free among x's buffer neighbors; at most deg(x) + 1."""
        used = {self.buf_color[w] for w in self.buffer.adj[x]}
        c = 1
        while c in used:
            c += 1
        self.buf_color[x] = c
        self._buf_tuples[x] = (c,)
        if self._combined is not None:
            self._combined[x] = self._combined[x][:-1] + (c,)

    def _violating_level(self) -> int | None:
        for i, rec in enumerate(self.records):
            if rec.kind != VACUOUS and self.max_deg * self.trigger < rec.max_deg:
                return i + 1
        return None

    # -- streaming interface ------------------------------------------------------

    def process(self, token: EdgeToken) -> None:
        if self.insert_only and token.op is not Op.INSERT:
            raise ValueError("colorer was configured for insert-only streams")
        for pool in self.pools:
            pool.feed(token)
        u, v = token.u, token.v
        if token.op is Op.INSERT:
            self._bump(u, 1)
            self._bump(v, 1)
            self.buffer.add_edge(u, v)
            if self.buf_color[u] == self.buf_color[v]:
                self._recolor_buffer(v)
        else:
            self._bump(u, -1)
            self._bump(v, -1)
            if self.buffer.remove_edge(u, v):
                for x in (u, v):
                    if self.buf_color[x] > self.buffer.degrees[x] + 1:
                        self._recolor_buffer(x)
            else:
                self.negative_edges += 1
        self.step += 1
        for i in range(self.levels):
            self.counters[i] += 1
        for i in range(self.levels):
            if self.counters[i] >= self.chunk[i]:
                self._checkpoint(i + 1, FIXED, "process")
                break
        if self.k == 2:
            lvl = self._violating_level()
            if lvl is not None:
                self._checkpoint(lvl, ADHOC, "process")
        sp = self.space_proxy()
        if sp > self.peak_space:
            self.peak_space = sp

    def query(self) -> Coloring:
        lvl = self._violating_level()
        if lvl is not None:
            self._checkpoint(lvl, ADHOC, "query")
            return product_coloring([r.coloring for r in self.records[:lvl]])
        if not self.records:
            return self.buffer_coloring()
        if self._combined is None:
            rec = product_coloring([r.coloring for r in self.records])
            self._combined = list(map(tuple.__add__, rec, self._buf_tuples))
        return tuple(self._combined)

    def buffer_coloring(self) -> Coloring:
        """Proper coloring of G' with every color(x) <= deg_G'(x) + 1, kept up to date per token."""
        return tuple(self._buf_tuples)

    def space_proxy(self) -> int:
        n = self.cfg.n
        words = 2 * n + self.levels * n + self.levels * 2
        return self.buffer.edge_count + words + sum(p.space_proxy() for p in self.pools)

    @property
    def degrees(self) -> list[int]:
        return self._deg

    def last_checkpoint_steps(self) -> list[int]:
        return [r.step for r in self.records]

    def to_bytes(self, include_seed: bool = True) -> bytes:
        """Canonical state encoding; pools are materialized first."""
        parts = [struct.pack("<IIII", self.cfg.n, self.k, self.step, self.max_deg),
                 pack_words(self._deg), pack_words(self.counters)]
        for rec in self.records:
            flat = [x for c in rec.coloring for x in c]
            arity = len(rec.coloring[0]) if rec.coloring else 0
            parts.append(struct.pack("<II", arity, rec.max_deg) + pack_words(flat))
        parts.append(pack_words([x for e in self.buffer.edges() for x in e]))
        for pool in self.pools:
            pool.materialize_all()
            parts.append(struct.pack("<I", pool.cursor))
            for i in range(pool.cursor, pool.size):
                parts.append(pool.live[i].sketch.to_bytes(include_seed))
        if include_seed:
            parts.append(struct.pack("<Q", self.cfg.seed))
        return b"".join(parts)
