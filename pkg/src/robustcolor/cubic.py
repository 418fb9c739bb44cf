"""Adversarially robust O(Δ³)-coloring for insert-only streams.

Every vertex x owns one random list per degree level i in [1, L], with
4·ceil(log2 n) colors drawn from [2i²].  A vertex recolored at degree d takes
a color (d, p) with p from its level-d list, so the colors ever used while
the max degree is Δ number at most 1 + Σ_{i≤Δ} 2i² ≤ 3Δ³.
"""

from __future__ import annotations

import struct

from .prf import KeyedPRF, LeveledPalettes
from .sketches import AlgorithmFailure, Sketch
from .stream import Coloring, EdgeToken, Op, StreamConfig, ceil_log2, pack_words, unpack_words


class RecolorFailed(AlgorithmFailure):
    pass


class DegreeBoundExceeded(ValueError):
    pass


class InsertOnlyViolation(ValueError):
    pass


def color_universe_size(delta: int) -> int:
    """1 + Σ_{i=1}^{Δ} 2i²: the default color plus every (i, p) with i ≤ Δ."""
    return 1 + sum(2 * i * i for i in range(1, delta + 1))


class CubicColorer(Sketch):
    insert_only = True

    def __init__(self, cfg: StreamConfig, seed: int | None = None, list_const: int = 4):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        n, L = cfg.n, cfg.L
        self.list_len = list_const * max(1, ceil_log2(n))
        self.palettes = LeveledPalettes(KeyedPRF(self.seed), self.list_len, lambda i: 2 * i * i)
        self.deg = [0] * n
        self.clr: list[tuple[int, int]] = [(0, 0)] * n
        self.A: dict[int, set[int]] = {}
        self.stored_edges = 0
        self.recolors = 0

    def designated(self, u: int, v: int) -> int:
        """Endpoint to recolor: larger degree after the increment, ties to smaller id."""
        du, dv = self.deg[u], self.deg[v]
        if du > dv or (du == dv and u < v):
            return u
        return v

    def process(self, token: EdgeToken) -> None:
        if token.op is not Op.INSERT:
            raise InsertOnlyViolation("the cubic colorer accepts insertions only")
        u, v = token.u, token.v
        L = self.cfg.L
        deg = self.deg
        if deg[u] + 1 > L or deg[v] + 1 > L:
            raise DegreeBoundExceeded(f"edge {{{u},{v}}} would push a degree above L={L}")
        deg[u] += 1
        deg[v] += 1
        k = max(deg[u], deg[v])
        overlap = self.palettes.overlap
        for i in range(k, L + 1):
            if overlap(u, v, i):
                self.A.setdefault(u, set()).add(v)
                self.A.setdefault(v, set()).add(u)
                self.stored_edges += 1
                break

        x = self.designated(u, v)
        d = deg[x]
        used = {self.clr[w] for w in self.A.get(x, ())}
        for p in self.palettes.list(x, d):
            c = (d, p)
            if c not in used:
                self.clr[x] = c
                self.recolors += 1
                return
        raise RecolorFailed(f"vertex {x}: all {self.list_len} level-{d} candidates are taken")

    def query(self) -> Coloring:
        return tuple(self.clr)

    def space_proxy(self) -> int:
        return self.stored_edges + 2 * self.cfg.n

    def space_bits(self) -> int:
        """Bit count of deg, clr and A at their natural field widths."""
        n, L = self.cfg.n, self.cfg.L
        deg_bits = ceil_log2(L + 1)
        pal_bits = ceil_log2(2 * L * L + 1)
        return n * deg_bits + n * (deg_bits + pal_bits) + self.stored_edges * 2 * ceil_log2(n)

    def max_stored_degree(self) -> int:
        return max((len(nb) for nb in self.A.values()), default=0)

    def to_bytes(self, include_seed: bool = True) -> bytes:
        n, L = self.cfg.n, self.cfg.L
        flat = [x for u in sorted(self.A) for v in sorted(self.A[u]) if u < v for x in (u, v)]
        parts = [struct.pack("<II", n, L), pack_words(self.deg),
                 pack_words([x for c in self.clr for x in c]), pack_words(flat)]
        if include_seed:
            parts.append(struct.pack("<Q", self.seed))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf: bytes, cfg: StreamConfig) -> "CubicColorer":
        n, L = struct.unpack_from("<II", buf, 0)
        if (n, L) != (cfg.n, cfg.L):
            raise ValueError("serialized state does not match the configuration")
        deg, off = unpack_words(buf, 8)
        flat_clr, off = unpack_words(buf, off)
        flat_edges, off = unpack_words(buf, off)
        (seed,) = struct.unpack_from("<Q", buf, off)
        obj = cls(cfg, seed)
        obj.deg = deg
        obj.clr = list(zip(flat_clr[0::2], flat_clr[1::2]))
        for u, v in zip(flat_edges[0::2], flat_edges[1::2]):
            obj.A.setdefault(u, set()).add(v)
            obj.A.setdefault(v, set()).add(u)
        obj.stored_edges = len(flat_edges) // 2
        return obj
