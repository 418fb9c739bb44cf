"""Stream tokens, ground-truth graph tracking, and coloring utilities.

Colors are tuples of small non-negative integers so that product colorings
compose by concatenation.  A coloring is a tuple of such color tuples, one
per vertex.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

Color = tuple[int, ...]
Coloring = tuple[Color, ...]


class StrictTurnstileViolation(ValueError):
    """Duplicate insertion or deletion of an absent edge."""


class SelfLoop(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class StreamParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Op(str, enum.Enum):
    INSERT = "i"
    DELETE = "d"


class EdgeToken(NamedTuple):
    op: Op
    u: int
    v: int

    @classmethod
    def make(cls, op: Op | str, u: int, v: int) -> "EdgeToken":
        """Build a token with canonical endpoint order (min, max)."""
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}")
        if u > v:
            u, v = v, u
        return cls(Op(op), int(u), int(v))

    @property
    def edge(self) -> tuple[int, int]:
        return (self.u, self.v)


def insert(u: int, v: int) -> EdgeToken:
    return EdgeToken.make(Op.INSERT, u, v)


def delete(u: int, v: int) -> EdgeToken:
    return EdgeToken.make(Op.DELETE, u, v)


@dataclass(frozen=True)
class StreamConfig:
    """Global stream parameters shared by algorithms and the harness."""

    n: int
    m: int
    L: int
    k: int = 2
    delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 0 < self.L <= self.n - 1:
            raise ValueError(f"L must satisfy 0 < L <= n-1, got L={self.L}, n={self.n}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def ceil_log2(x: int) -> int:
    """Smallest j >= 0 with 2**j >= x (0 for x <= 1)."""
    return 0 if x <= 1 else (int(x) - 1).bit_length()


class GroundTruthGraph:
    """Adjacency-set graph on [n] with O(1) max-degree maintenance.

    With ``strict=True`` (the default) the strict-turnstile promises are
    enforced.  With ``strict=False`` a deletion of an absent edge is a no-op
    and returns False; sketches that see a substream use this mode.
    """

    def __init__(self, n: int, strict: bool = True):
        self.n = n
        self.strict = strict
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.degrees = [0] * n
        self.edge_count = 0
        self.max_degree = 0
        # degree histogram; hist[d] = number of vertices of degree d
        self._hist = [n]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self.adj[u]:
                if u < v:
                    yield (u, v)

    def _bump(self, x: int, step: int) -> None:
        d = self.degrees[x]
        self._hist[d] -= 1
        d += step
        if d == len(self._hist):
            self._hist.append(0)
        self._hist[d] += 1
        self.degrees[x] = d
        if d > self.max_degree:
            self.max_degree = d
        while self.max_degree > 0 and self._hist[self.max_degree] == 0:
            self.max_degree -= 1

    def add_edge(self, u: int, v: int) -> bool:
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}")
        if v in self.adj[u]:
            if self.strict:
                raise StrictTurnstileViolation(f"edge {{{u},{v}}} already present")
            return False
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edge_count += 1
        self._bump(u, 1)
        self._bump(v, 1)
        return True

    def remove_edge(self, u: int, v: int) -> bool:
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}")
        if v not in self.adj[u]:
            if self.strict:
                raise StrictTurnstileViolation(f"edge {{{u},{v}}} not present")
            return False
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.edge_count -= 1
        self._bump(u, -1)
        self._bump(v, -1)
        return True

    def apply(self, t: EdgeToken) -> bool:
        if t.op is Op.INSERT:
            return self.add_edge(t.u, t.v)
        return self.remove_edge(t.u, t.v)

    def check(self, t: EdgeToken) -> None:
        """Raise if applying ``t`` would break the strict-turnstile promise."""
        present = t.v in self.adj[t.u]
        if t.op is Op.INSERT and present:
            raise StrictTurnstileViolation(f"duplicate insert of {{{t.u},{t.v}}}")
        if t.op is Op.DELETE and not present:
            raise StrictTurnstileViolation(f"delete of absent edge {{{t.u},{t.v}}}")

    def copy(self) -> "GroundTruthGraph":
        g = GroundTruthGraph(self.n, self.strict)
        g.adj = [set(a) for a in self.adj]
        g.degrees = list(self.degrees)
        g.edge_count = self.edge_count
        g.max_degree = self.max_degree
        g._hist = list(self._hist)
        return g


def apply_token(g: GroundTruthGraph, t: EdgeToken) -> GroundTruthGraph:
    """Apply one token in place and return the graph."""
    g.apply(t)
    return g


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> GroundTruthGraph:
    g = GroundTruthGraph(n)
    for u, v in edges:
        g.add_edge(u, v)
    return g


def is_proper(c: Sequence[Color], g: GroundTruthGraph) -> bool:
    if len(c) != g.n:
        raise LengthMismatch(f"coloring has length {len(c)}, graph has {g.n} vertices")
    for u, nb in enumerate(g.adj):
        cu = c[u]
        for v in nb:
            if c[v] == cu:
                return False
    return True


def make_coloring(colors: Iterable) -> Coloring:
    """Normalize ints or tuples into a coloring with a single tuple arity."""
    out = tuple(x if isinstance(x, tuple) else (int(x),) for x in colors)
    if out and len({len(x) for x in out}) != 1:
        raise ValueError("all color tuples in one coloring must share an arity")
    return out


def product_coloring(cs: Sequence[Sequence[Color]]) -> Coloring:
    if not cs:
        raise ValueError("product of an empty list of colorings")
    n = len(cs[0])
    if any(len(c) != n for c in cs):
        raise LengthMismatch("colorings in a product must have equal length")
    if len(cs) == 1:
        return tuple(cs[0])
    if len(cs) == 2:
        return tuple(a + b for a, b in zip(*cs))
    return tuple(sum(parts, ()) for parts in zip(*cs))


def constant_coloring(n: int, value: int = 1) -> Coloring:
    return ((value,),) * n


def greedy_color(g: GroundTruthGraph, order: Sequence[int] | None = None) -> Coloring:
    """First-fit coloring in the given vertex order; colors lie in [1, Δ+1]."""
    n = g.n
    col = [0] * n
    adj = g.adj
    for v in range(n) if order is None else order:
        used = {col[w] for w in adj[v]}
        c = 1
        while c in used:
            c += 1
        col[v] = c
    return tuple((c,) for c in col)


def count_colors(c: Iterable[Color]) -> int:
    return len(set(c))


# -- text formats -----------------------------------------------------------

def parse_stream(lines: Iterable[str]) -> Iterator[tuple[int, EdgeToken]]:
    """Yield (line number, token) pairs from the `i u v` / `d u v` format."""
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("i", "d"):
            raise StreamParseError(no, f"expected 'i <u> <v>' or 'd <u> <v>', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise StreamParseError(no, f"non-integer vertex id in {line!r}") from None
        if u < 0 or v < 0:
            raise StreamParseError(no, "vertex ids must be non-negative")
        try:
            yield no, EdgeToken.make(parts[0], u, v)
        except SelfLoop as exc:
            raise StreamParseError(no, str(exc)) from None


def read_stream(path) -> list[tuple[int, EdgeToken]]:
    with open(path) as fh:
        return list(parse_stream(fh))


def format_stream(tokens: Iterable[EdgeToken]) -> str:
    return "".join(f"{t.op.value} {t.u} {t.v}\n" for t in tokens)


def format_coloring(c: Sequence[Color]) -> str:
    return "".join(f"{v} ({','.join(map(str, col))})\n" for v, col in enumerate(c))


def parse_coloring(text: str) -> Coloring:
    colors = []
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        vid, _, rest = line.partition(" ")
        if int(vid) != len(colors) or not (rest.startswith("(") and rest.endswith(")")):
            raise StreamParseError(no, f"malformed coloring line {line!r}")
        colors.append(tuple(int(x) for x in rest[1:-1].split(",")))
    return make_coloring(colors)


# -- binary packing used for state serialization ----------------------------

def pack_words(values: Sequence[int]) -> bytes:
    """Length-prefixed little-endian uint32 array."""
    return struct.pack(f"<I{len(values)}I", len(values), *values)


def unpack_words(buf: bytes, offset: int) -> tuple[list[int], int]:
    (count,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    values = list(struct.unpack_from(f"<{count}I", buf, offset))
    return values, offset + 4 * count

