"""Keyed pseudorandom function and the per-vertex leveled palette lists.

Random color lists are never stored as bits; every entry is recomputed from
``blake2b(key=seed, coords)``, so a seed plus coordinates reproduces a list
exactly.
"""

from __future__ import annotations

import hashlib
import struct

_MASK64 = (1 << 64) - 1


class KeyedPRF:
    """64-bit words indexed by integer coordinates, keyed by a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._key = struct.pack("<Q", self.seed)

    def words(self, coords: tuple[int, ...], count: int) -> list[int]:
        out: list[int] = []
        base = struct.pack(f"<{len(coords)}q", *coords)
        block = 0
        while len(out) < count:
            h = hashlib.blake2b(base + struct.pack("<I", block), key=self._key, digest_size=64)
            out.extend(struct.unpack("<8Q", h.digest()))
            block += 1
        return out[:count]

    def word(self, *coords: int) -> int:
        return self.words(coords, 1)[0]

    def child(self, *coords: int) -> "KeyedPRF":
        """An independent PRF keyed by a derived seed."""
        return KeyedPRF(self.word(0x5EED, *coords))

    def uniform_list(self, coords: tuple[int, ...], length: int, size: int) -> list[int]:
        """``length`` draws with replacement from {1, ..., size}."""
        # modulo bias is at most size / 2**64
        return [1 + w % size for w in self.words(coords, length)]


def derive_seed(seed: int, *coords: int) -> int:
    return KeyedPRF(seed).word(0xD1CE, *coords)


class LeveledPalettes:
    """Lists P[x][level] of ``length`` colors drawn from [palette_size(level)].

    Lists are derived lazily from the PRF and memoized; the memo is a cache
    of recomputable random bits, not algorithm state.
    """

    def __init__(self, prf: KeyedPRF, length: int, palette_size):
        self.prf = prf
        self.length = length
        self.palette_size = palette_size
        self._lists: dict[tuple[int, int], list[int]] = {}
        self._sets: dict[tuple[int, int], frozenset[int]] = {}

    def list(self, x: int, level: int) -> list[int]:
        key = (x, level)
        lst = self._lists.get(key)
        if lst is None:
            lst = self.prf.uniform_list((x, level), self.length, self.palette_size(level))
            self._lists[key] = lst
        return lst

    def set(self, x: int, level: int) -> frozenset[int]:
        key = (x, level)
        s = self._sets.get(key)
        if s is None:
            s = frozenset(self.list(x, level))
            self._sets[key] = s
        return s

    def lookup(self, x: int, level: int, slot: int) -> int:
        return self.list(x, level)[slot]

    def overlap(self, x: int, y: int, level: int) -> bool:
        return not self.set(x, level).isdisjoint(self.set(y, level))
