"""Oblivious-adversary coloring sketches.

``PaletteSketch`` is the space-efficient sketch used inside the switching
algorithms; ``ExactBufferSketch`` stores every edge and serves as an oracle.
Both follow the same small contract: ``process(token)``, ``query()``,
``space_proxy()``.
"""

from __future__ import annotations

import random
from abc import ABC, abstractmethod

from .prf import KeyedPRF, LeveledPalettes
from .stream import (
    Coloring,
    EdgeToken,
    GroundTruthGraph,
    Op,
    StreamConfig,
    ceil_log2,
    greedy_color,
    pack_words,
)


class AlgorithmFailure(RuntimeError):
    """An algorithm declared FAIL (abort).  Distinct from adversary faults."""


class ListColoringFailed(AlgorithmFailure):
    pass


class Sketch(ABC):
    """A streaming coloring algorithm: init via the constructor, then
    ``process`` tokens and ``query`` colorings."""

    insert_only = False

    @abstractmethod
    def process(self, token: EdgeToken) -> None: ...

    @abstractmethod
    def query(self) -> Coloring: ...

    @abstractmethod
    def space_proxy(self) -> int:
        """Stored edges plus stored machine words, excluding PRF seeds."""

    def to_bytes(self, include_seed: bool = True) -> bytes:
        raise NotImplementedError


class ExactBufferSketch(Sketch):
    """Stores the whole (sub)stream graph; query is first-fit greedy."""

    def __init__(self, cfg: StreamConfig, seed: int = 0):
        self.cfg = cfg
        self.graph = GroundTruthGraph(cfg.n, strict=False)
        self.foreign_deletes = 0

    def process(self, token: EdgeToken) -> None:
        if token.op is Op.INSERT:
            self.graph.add_edge(token.u, token.v)
        elif not self.graph.remove_edge(token.u, token.v):
            # delete of an edge inserted before this sketch was started
            self.foreign_deletes += 1

    def query(self) -> Coloring:
        return greedy_color(self.graph)

    def space_proxy(self) -> int:
        return self.graph.edge_count + self.cfg.n

    def to_bytes(self, include_seed: bool = True) -> bytes:
        flat = [x for e in self.graph.edges() for x in e]
        return pack_words(self.graph.degrees) + pack_words(flat)


def list_color(
    vertices: list[int],
    lists: dict[int, list[int]],
    adj: dict[int, set[int]],
    rng: random.Random,
    retries: int = 8,
    budget: int = 10**6,
) -> dict[int, int] | None:
    """Pick ``color[v] in lists[v]`` with adjacent vertices colored differently.

    Randomized first-fit over ``retries`` shuffled orders, then exact
    backtracking (fewest-remaining-options first) capped at ``budget`` node
    expansions.  Returns None when both give up.
    """
    order = list(vertices)
    for _ in range(retries):
        rng.shuffle(order)
        color: dict[int, int] = {}
        for v in order:
            used = {color[w] for w in adj.get(v, ()) if w in color}
            for p in lists[v]:
                if p not in used:
                    color[v] = p
                    break
            else:
                break
        else:
            return color

    # only vertices with constraints need search; the rest take their first entry
    constrained = [v for v in vertices if adj.get(v)]
    color = {v: lists[v][0] for v in vertices if not adj.get(v)}
    options = {v: list(dict.fromkeys(lists[v])) for v in constrained}
    expansions = 0

    def pick() -> int | None:
        best, best_n = None, None
        for v in constrained:
            if v in color:
                continue
            used = {color[w] for w in adj[v] if w in color}
            k = sum(1 for p in options[v] if p not in used)
            if best_n is None or k < best_n:
                best, best_n = v, k
                if k == 0:
                    break
        return best

    def search() -> bool:
        nonlocal expansions
        v = pick()
        if v is None:
            return True
        used = {color[w] for w in adj[v] if w in color}
        for p in options[v]:
            if p in used:
                continue
            expansions += 1
            if expansions > budget:
                return False
            color[v] = p
            if search():
                return True
            del color[v]
        return False

    return color if search() else None


class PaletteSketch(Sketch):
    """Degree-leveled palette sparsification.

    Level j uses palette {1..2^(j+1)}; each vertex has a PRF-derived list of
    ``c * ceil(log2 n)`` colors per level.  An inserted edge is stored iff the
    two endpoint lists intersect at some level in
    [ceil(log2 max(deg u, deg v)), ceil(log2 L)].

    At query time vertex v is colored at level
    ``max(ceil(log2 Δ), ceil(log2 hw(v)))`` where hw(v) is the largest degree
    counter v has reached.  On insert-only streams hw(v) <= Δ, so every vertex
    uses level ceil(log2 Δ).  Under deletions the per-vertex floor keeps every
    live edge's storage check in range of the level it is colored at.
    """

    def __init__(self, cfg: StreamConfig, seed: int, c: float = 4, retries: int = 8,
                 budget: int = 10**6):
        self.cfg = cfg
        self.seed = seed
        n = cfg.n
        self.top = ceil_log2(cfg.L)
        self.list_len = max(1, round(c * ceil_log2(n)))
        self.retries = retries
        self.budget = budget
        prf = KeyedPRF(seed)
        self.palettes = LeveledPalettes(prf, self.list_len, lambda j: 2 ** (j + 1))
        self._order_prf = prf.child(1)
        self.deg = [0] * n
        self.hw = [0] * n
        self.stored: dict[int, set[int]] = {}
        self.stored_count = 0
        self.queries = 0

    def _store(self, u: int, v: int) -> None:
        self.stored.setdefault(u, set()).add(v)
        self.stored.setdefault(v, set()).add(u)
        self.stored_count += 1

    def process(self, token: EdgeToken) -> None:
        u, v = token.u, token.v
        deg = self.deg
        if token.op is Op.INSERT:
            deg[u] += 1
            deg[v] += 1
            if deg[u] > self.hw[u]:
                self.hw[u] = deg[u]
            if deg[v] > self.hw[v]:
                self.hw[v] = deg[v]
            low = ceil_log2(max(deg[u], deg[v]))
            overlap = self.palettes.overlap
            for j in range(low, self.top + 1):
                if overlap(u, v, j):
                    self._store(u, v)
                    break
        else:
            # counters floor at zero: a substream may delete edges it never saw
            if deg[u] > 0:
                deg[u] -= 1
            if deg[v] > 0:
                deg[v] -= 1
            nb = self.stored.get(u)
            if nb is not None and v in nb:
                nb.discard(v)
                self.stored[v].discard(u)
                self.stored_count -= 1

    def query_levels(self) -> list[int]:
        base = ceil_log2(max(max(self.deg), 1))
        return [max(base, ceil_log2(h)) for h in self.hw]

    def query(self) -> Coloring:
        levels = self.query_levels()
        groups: dict[int, list[int]] = {}
        for v, j in enumerate(levels):
            groups.setdefault(j, []).append(v)
        rng = random.Random(self._order_prf.word(self.queries))
        self.queries += 1
        colors: list[tuple[int, int] | None] = [None] * self.cfg.n
        for j in sorted(groups):
            members = groups[j]
            lists = {v: self.palettes.list(v, j) for v in members}
            adj = {}
            for v in members:
                nb = self.stored.get(v)
                if nb:
                    same = {w for w in nb if levels[w] == j}
                    if same:
                        adj[v] = same
            assignment = list_color(members, lists, adj, rng, self.retries, self.budget)
            if assignment is None:
                raise ListColoringFailed(f"level {j}: list coloring of stored conflict graph failed")
            for v in members:
                colors[v] = (j, assignment[v])
        return tuple(colors)  # type: ignore[arg-type]

    def space_proxy(self) -> int:
        return self.stored_count + 2 * self.cfg.n

    def to_bytes(self, include_seed: bool = True) -> bytes:
        flat = [x for u, nb in sorted(self.stored.items()) for v in sorted(nb) if u < v for x in (u, v)]
        head = pack_words([self.seed & 0xFFFFFFFF, self.seed >> 32]) if include_seed else b""
        return head + pack_words(self.deg) + pack_words(self.hw) + pack_words(flat)


SKETCHES = {"exact": ExactBufferSketch, "palette": PaletteSketch}


def make_sketch(kind: str, cfg: StreamConfig, seed: int, **kwargs) -> Sketch:
    try:
        cls = SKETCHES[kind]
    except KeyError:
        raise ValueError(f"unknown sketch {kind!r}; choose from {sorted(SKETCHES)}") from None
    return cls(cfg, seed, **kwargs) if kwargs else cls(cfg, seed)
