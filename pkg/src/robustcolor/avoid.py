"""Subset-avoidance: bounds, a covering protocol, and the coloring reduction.

In AVOID(t, a, b) Alice holds an a-subset S of [t] and sends one message;
Bob must answer with a b-subset of [t] disjoint from S.  Universe elements
are 0-based here.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .sketches import AlgorithmFailure, Sketch
from .stream import GroundTruthGraph, StrictTurnstileViolation, insert


class CoveringNotFound(RuntimeError):
    pass


class DegreeOverflow(RuntimeError):
    """Alice could not draw a low-degree block graph within the resample cap."""


class RecoveryShortfall(RuntimeError):
    pass


@dataclass(frozen=True)
class AvoidInstance:
    t: int
    a: int
    b: int
    k: int = 1
    delta: float = 0.0

    def __post_init__(self):
        if self.t < 1 or self.a < 0 or self.b < 0:
            raise ValueError("need t >= 1 and a, b >= 0")
        if self.a + self.b > self.t:
            raise ValueError(f"a + b = {self.a + self.b} exceeds t = {self.t}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")

    @property
    def ratio(self) -> float:
        """C(t, a) / C(t-b, a) as a float (may be large)."""
        return 2.0 ** self.log2_ratio

    @property
    def log2_ratio(self) -> float:
        return math.log2(math.comb(self.t, self.a)) - math.log2(math.comb(self.t - self.b, self.a))


def avoid_lower_bound(inst: AvoidInstance, exact: bool = True) -> float:
    """Bits any delta-error protocol for k parallel instances must send.

    exact:   log2(1-δ) + k·log2(C(t,a)/C(t-b,a))
    relaxed: log2(1-δ) + k·a·b/(t·ln 2)
    """
    base = math.log2(1 - inst.delta)
    if exact:
        return base + inst.k * inst.log2_ratio
    return base + inst.k * inst.a * inst.b / (inst.t * math.log(2))


def covering_size(inst: AvoidInstance) -> int:
    """z = ceil(ratio · ln C(t,a)), at least 1."""
    n_sets = math.comb(inst.t, inst.a)
    z = math.ceil(inst.ratio * math.log(n_sets)) if n_sets > 1 else 0
    return max(1, z)


def message_bound(inst: AvoidInstance) -> float:
    """log2(ratio) + log2(ln C(t,a)) + 2, the deterministic protocol's cost bound."""
    ln_sets = math.log(math.comb(inst.t, inst.a))
    if ln_sets <= 0:
        return float("inf") if inst.a else 2.0
    return inst.log2_ratio + math.log2(ln_sets) + 2


def _mask(elems) -> int:
    m = 0
    for e in elems:
        m |= 1 << e
    return m


@dataclass
class CoveringCollection:
    inst: AvoidInstance
    sets: list[tuple[int, ...]]
    seed: int
    attempts: int = 1
    _masks: list[int] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._masks = [_mask(T) for T in self.sets]

    @property
    def z(self) -> int:
        return len(self.sets)

    @property
    def message_bits(self) -> int:
        return max(0, math.ceil(math.log2(self.z))) if self.z > 1 else 0

    def encode(self, S: Sequence[int]) -> int:
        """Alice: index of the first set disjoint from S."""
        ms = _mask(S)
        for j, mt in enumerate(self._masks):
            if not ms & mt:
                return j
        raise CoveringNotFound(f"no set in the collection avoids {sorted(S)}")

    def decode(self, j: int) -> tuple[int, ...]:
        return self.sets[j]

    def verify(self) -> bool:
        """Exhaustively check every a-subset of [t] is avoided by some member."""
        masks = self._masks
        for S in itertools.combinations(range(self.inst.t), self.inst.a):
            ms = _mask(S)
            if all(ms & mt for mt in masks):
                return False
        return True


def build_covering(inst: AvoidInstance, seed: int = 0, max_attempts: int = 20,
                   cap: int = 10**6) -> CoveringCollection:
    """Draw z distinct random b-subsets until the collection passes exhaustive verification."""
    if math.comb(inst.t, inst.a) > cap:
        raise ValueError(f"C({inst.t},{inst.a}) exceeds the verification cap {cap}")
    z = covering_size(inst)
    universe = math.comb(inst.t, inst.b)
    z_eff = min(z, universe)
    for attempt in range(1, max_attempts + 1):
        rng = random.Random(seed * 1_000_003 + attempt)
        chosen: set[tuple[int, ...]] = set()
        ordered: list[tuple[int, ...]] = []
        while len(ordered) < z_eff:
            T = tuple(sorted(rng.sample(range(inst.t), inst.b)))
            if T not in chosen:
                chosen.add(T)
                ordered.append(T)
        cov = CoveringCollection(inst, ordered, seed, attempt)
        if cov.verify():
            return cov
    raise CoveringNotFound(f"no verified covering within {max_attempts} attempts")


# -- coloring-based reduction --------------------------------------------------------


def complete_graph_edges(m: int) -> list[tuple[int, int]]:
    """Fixed enumeration e_0, e_1, ... of the edges of K_m."""
    return list(itertools.combinations(range(m), 2))


def reduction_params(K: int, L: int) -> tuple[int, int, int]:
    """(t, a, b) = (C(2K,2), floor(LK/4), floor(L/2)·ceil(K/2))."""
    return math.comb(2 * K, 2), (L * K) // 4, (L // 2) * math.ceil(K / 2)


@dataclass
class ReductionSetup:
    n: int
    K: int
    L: int
    seed: int = 0
    max_resamples: int = 10

    def __post_init__(self):
        if self.K < 1 or 2 * self.K > self.n:
            raise ValueError("need 1 <= K and 2K <= n")
        if self.L < 2:
            raise ValueError("need L >= 2 so that Bob runs at least one round")
        self.t, self.a, self.b = reduction_params(self.K, self.L)
        if self.a + self.b > self.t:
            raise ValueError("parameters give a + b > t")
        self.s = self.n // (2 * self.K)
        self.edges = complete_graph_edges(2 * self.K)
        self.rounds = self.L // 2

    def block(self, i: int) -> range:
        return range(2 * self.K * i, 2 * self.K * (i + 1))

    def permutation(self, block: int, attempt: int) -> list[int]:
        """Public random permutation pi of [t] for one block; pi[i] labels edge e_i."""
        rng = random.Random(f"{self.seed}/{block}/{attempt}")
        pi = list(range(self.t))
        rng.shuffle(pi)
        return pi

    def instance(self, delta: float = 0.0) -> AvoidInstance:
        return AvoidInstance(self.t, self.a, self.b, self.s, delta)

    def random_sets(self, rng: random.Random) -> list[frozenset[int]]:
        return [frozenset(rng.sample(range(self.t), self.a)) for _ in range(self.s)]


def alice_edges(setup: ReductionSetup, S: frozenset[int], pi: list[int]) -> list[tuple[int, int]]:
    return [e for e, label in zip(setup.edges, pi) if label in S]


def _max_degree(edges, m: int) -> int:
    deg = [0] * m
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)


@dataclass
class AliceMessage:
    state: bytes
    permutations: list[list[int]]
    resamples: int
    graph: GroundTruthGraph

    @property
    def byte_length(self) -> int:
        return len(self.state)


def alice_encode(setup: ReductionSetup, sets: Sequence[frozenset[int]], alg: Sketch) -> AliceMessage:
    """Feed every block's pi-mapped edges into ``alg`` and serialize its state.

    Each block's permutation is publicly resampled until that block's graph has
    max degree at most L/2.  The PRF seed is public, so it is not counted.
    """
    g = GroundTruthGraph(setup.n)
    perms, resamples = [], 0
    for i, S in enumerate(sets):
        if len(S) != setup.a:
            raise ValueError(f"block {i}: Alice's set has {len(S)} elements, expected {setup.a}")
        for attempt in range(setup.max_resamples + 1):
            pi = setup.permutation(i, attempt)
            local = alice_edges(setup, S, pi)
            if 2 * _max_degree(local, 2 * setup.K) <= setup.L:
                break
            resamples += 1
        else:
            raise DegreeOverflow(f"block {i}: max degree above L/2 after {setup.max_resamples} resamples")
        perms.append(pi)
        off = setup.block(i).start
        for u, v in local:
            tok = insert(u + off, v + off)
            g.apply(tok)
            alg.process(tok)
    return AliceMessage(alg.to_bytes(include_seed=False), perms, resamples, g)


def like_colored_pairing(vertices: Sequence[int], coloring) -> list[tuple[int, int]]:
    """Greedy lexicographic maximal pairing inside each color class."""
    classes: dict = {}
    for v in sorted(vertices):
        classes.setdefault(coloring[v], []).append(v)
    pairs = []
    for members in classes.values():
        pairs.extend((members[j], members[j + 1]) for j in range(0, len(members) - 1, 2))
    return sorted(pairs)


@dataclass
class BobResult:
    recovered: list[list[int]]
    pairs_found: list[int]
    inserted: list[tuple[int, int]]
    colorings_used: list[int]


def bob_recover(setup: ReductionSetup, msg: AliceMessage, alg: Sketch) -> BobResult:
    """Run floor(L/2) query-and-match rounds and map found pairs back through pi^-1.

    ``alg`` is the instance holding Alice's state.  Raises RecoveryShortfall
    when a block yields fewer than floor(L/2)·ceil(K/2) pairs.
    """
    g = msg.graph
    J: list[list[tuple[int, int]]] = [[] for _ in range(setup.s)]
    inserted, colors = [], []
    for _ in range(setup.rounds):
        clr = alg.query()
        colors.append(len(set(clr)))
        for i in range(setup.s):
            for u, v in like_colored_pairing(setup.block(i), clr):
                if g.has_edge(u, v):
                    raise StrictTurnstileViolation(f"like-colored pair {{{u},{v}}} is already an edge")
                if g.degrees[u] + 1 > setup.L or g.degrees[v] + 1 > setup.L:
                    raise ValueError(f"pair {{{u},{v}}} would exceed the degree bound")
                tok = insert(u, v)
                g.apply(tok)
                alg.process(tok)
                inserted.append((u, v))
                J[i].append((u, v))
    index = {e: j for j, e in enumerate(setup.edges)}
    need = setup.b
    recovered, found = [], []
    for i in range(setup.s):
        found.append(len(J[i]))
        if len(J[i]) < need:
            raise RecoveryShortfall(f"block {i}: {len(J[i])} pairs found, need {need}")
        off = setup.block(i).start
        pi = msg.permutations[i]
        recovered.append([pi[index[(u - off, v - off)]] for u, v in J[i][:need]])
    return BobResult(recovered, found, inserted, colors)


@dataclass
class ReductionTrial:
    n: int
    K: int
    L: int
    s: int
    bytes_sent: int
    overhead_bytes: int
    elements_recovered: int
    lower_bound_bits: float
    success: bool
    disjoint: bool
    error: str = ""

    @property
    def measured_bits(self) -> int:
        return 8 * (self.bytes_sent - self.overhead_bytes)

    def row(self) -> list:
        return [self.n, self.K, self.L, self.s, self.bytes_sent, self.elements_recovered,
                f"{self.lower_bound_bits:.4f}", int(self.success)]


TRIAL_HEADER = ["n", "K", "L", "s", "bytesSent", "elementsRecovered", "lowerBoundBits", "success"]


def run_reduction(setup: ReductionSetup, make_alg: Callable[[], Sketch], rng: random.Random) -> ReductionTrial:
    """One end-to-end trial on random Alice sets.

    Communication is the serialized state length; the fixed overhead is the
    length of an untouched instance's state.
    """
    lb = avoid_lower_bound(setup.instance(0.0), exact=True)
    overhead = len(make_alg().to_bytes(include_seed=False))
    sets = setup.random_sets(rng)
    alg = make_alg()
    base = dict(n=setup.n, K=setup.K, L=setup.L, s=setup.s, overhead_bytes=overhead, lower_bound_bits=lb)
    try:
        msg = alice_encode(setup, sets, alg)
    except (DegreeOverflow, AlgorithmFailure) as exc:
        return ReductionTrial(bytes_sent=0, elements_recovered=0, success=False, disjoint=True,
                              error=f"{type(exc).__name__}: {exc}", **base)
    try:
        res = bob_recover(setup, msg, alg)
    except (RecoveryShortfall, AlgorithmFailure, StrictTurnstileViolation, ValueError) as exc:
        return ReductionTrial(bytes_sent=msg.byte_length, elements_recovered=0, success=False,
                              disjoint=True, error=f"{type(exc).__name__}: {exc}", **base)
    disjoint = all(not (set(T) & S) for T, S in zip(res.recovered, sets))
    got = min(len(T) for T in res.recovered)
    return ReductionTrial(bytes_sent=msg.byte_length, elements_recovered=got, success=disjoint,
                          disjoint=disjoint, **base)
