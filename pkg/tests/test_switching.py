import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_turnstile
from robustcolor.harness import MonochromaticAdversary, RandomAdversary, run_game
from robustcolor.stream import GroundTruthGraph, StreamConfig, count_colors, delete, insert, is_proper
from robustcolor.switching import (
    ADHOC,
    FIXED,
    VACUOUS,
    RetiredSketchError,
    SketchesExhausted,
    SwitchingColorer,
    chunk_sizes,
    pool_size,
)


def star_then_prune(k):
    """Star of degree 10 plus one leaf edge; with n = m = 11 the 11th token is a fixed checkpoint."""
    n = 11
    alg = SwitchingColorer(StreamConfig(n=n, m=n, L=n - 1, k=k), sketch="exact")
    g = GroundTruthGraph(n)
    for t in [insert(0, leaf) for leaf in range(1, 11)] + [insert(1, 2)]:
        g.apply(t)
        alg.process(t)
    return alg, g


class TestSizes:
    def test_chunk_k2(self):
        assert chunk_sizes(StreamConfig(n=100, m=10000, L=10), 2) == [1000]

    def test_chunk_general(self):
        cfg = StreamConfig(n=128, m=128 * 125, L=10)
        assert chunk_sizes(cfg, 3) == [math.ceil(128 * 125 ** (2 / 3)), math.ceil(128 * 125 ** (1 / 3))]

    def test_pool_sizes(self):
        cfg = StreamConfig(n=128, m=128 * 16, L=10)
        assert pool_size(cfg, 2, 4.0, False) == math.ceil(4 * 4 * 7)
        assert pool_size(cfg, 3, 1.0, False) == math.ceil(16 ** (1 / 3) * 21 ** 3)
        assert pool_size(cfg, 2, 4.0, True) == 16


def test_ten_fixed_checkpoints():
    cfg = StreamConfig(n=100, m=10000, L=99, seed=1)
    alg = SwitchingColorer(cfg, sketch="exact")
    tr = run_game(alg, RandomAdversary(cfg, 5, steps=10000, delete_prob=0.45), cfg, query_every_token=False)
    assert len(tr.tokens) == 10000
    fixed = [e for e in alg.events if e.kind == FIXED]
    assert [e.step for e in fixed] == [1000 * i for i in range(1, 11)]
    assert tr.improper_count == 0


def test_first_token_no_checkpoint():
    alg = SwitchingColorer(StreamConfig(n=10, m=100, L=5))
    alg.process(insert(0, 1))
    assert alg.events == [] and all(r.kind == VACUOUS for r in alg.records)


def test_query_before_tokens_is_single_color():
    alg = SwitchingColorer(StreamConfig(n=10, m=100, L=5, k=3))
    assert count_colors(alg.query()) == 1


def test_negative_edge():
    cfg = StreamConfig(n=10, m=10, L=5)  # chunk = n * 1 = 10
    alg = SwitchingColorer(cfg, sketch="exact")
    for v in range(1, 6):
        alg.process(insert(0, v))
    for v in range(6, 10):
        alg.process(insert(1, v))
    alg.process(insert(2, 3))
    assert alg.events and alg.events[-1].kind == FIXED and alg.buffer.edge_count == 0
    lead = alg.pools[0].live[alg.pools[0].cursor].sketch
    before = lead.graph.edge_count
    alg.process(delete(0, 1))
    assert alg.negative_edges == 1
    assert alg.buffer.edge_count == 0
    assert alg.counters[0] == 1
    assert lead.foreign_deletes == 0 and lead.graph.edge_count == before - 1


def test_adhoc_in_process_k2():
    alg, g = star_then_prune(2)
    assert [(e.kind, e.max_deg) for e in alg.events] == [(FIXED, 10)]
    for leaf in range(1, 7):
        g.remove_edge(0, leaf)
        alg.process(delete(0, leaf))
    assert g.max_degree == 4
    last = alg.events[-1]
    assert (last.kind, last.level, last.source, last.max_deg) == (ADHOC, 1, "process", 4)
    c = alg.query()
    assert is_proper(c, g)
    assert count_colors(c) == count_colors(alg.records[0].coloring)


def test_adhoc_at_query_general_k():
    n = 24
    alg = SwitchingColorer(StreamConfig(n=n, m=n, L=n - 1, k=3), sketch="exact")
    g = GroundTruthGraph(n)
    toks = [insert(0, leaf) for leaf in range(1, 11)]
    toks += [insert(a, a + 1) for a in range(11, 23)] + [insert(11, 13), insert(12, 14)]
    assert len(toks) == 24
    for t in toks:
        g.apply(t)
        alg.process(t)
    assert alg.events[-1].kind == FIXED and alg.events[-1].level == 1
    assert alg.records[0].max_deg == 10
    for leaf in (1, 2):
        g.remove_edge(0, leaf)
        alg.process(delete(0, leaf))
    n_events = len(alg.events)
    assert g.max_degree == 8
    c = alg.query()
    assert len(alg.events) == n_events + 1
    ev = alg.events[-1]
    assert (ev.kind, ev.level, ev.source) == (ADHOC, 1, "query")
    assert len(c[0]) == 1  # product over level 1 only
    assert is_proper(c, g)
    assert alg.records[1].kind == VACUOUS


def test_retired_sketch_cannot_process():
    alg = SwitchingColorer(StreamConfig(n=10, m=100, L=5))
    ps = alg.pools[0].take_fresh()
    with pytest.raises(RetiredSketchError):
        ps.feed(insert(0, 1))


def test_discipline_over_adaptive_game():
    """Every queried sketch is retired and never fed again (feeding would raise)."""
    cfg = StreamConfig(n=64, m=64 * 8, L=8, k=3, seed=2)
    alg = SwitchingColorer(cfg)
    tr = run_game(alg, MonochromaticAdversary(cfg), cfg)
    assert not tr.failed and tr.improper_count == 0
    for pool in alg.pools:
        assert all(not ps.retired for ps in pool.live.values())
        assert all(i >= pool.cursor for i in pool.live)


def test_sketches_exhausted():
    cfg = StreamConfig(n=8, m=64, L=7, seed=3)
    alg = SwitchingColorer(cfg, sketch="exact", C=0.01)
    assert alg.s == 1
    toks, _ = random_turnstile(8, 60, 7, 1, delete_prob=0.5)
    assert len(toks) >= 46
    with pytest.raises(SketchesExhausted):
        for t in toks:
            alg.process(t)


def test_insert_only_mode_rejects_deletes():
    alg = SwitchingColorer(StreamConfig(n=8, m=64, L=7), insert_only=True)
    alg.process(insert(0, 1))
    with pytest.raises(ValueError):
        alg.process(delete(0, 1))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_lazy_matches_eager(k):
    cfg = StreamConfig(n=20, m=60, L=6, k=k, seed=4)
    toks, _ = random_turnstile(20, 60, 6, 9)
    lazy = SwitchingColorer(cfg, C=0.5)
    eager = SwitchingColorer(cfg, C=0.5, materialize="eager")
    for t in toks:
        lazy.process(t)
        eager.process(t)
        assert lazy.query() == eager.query()
    assert [(e.step, e.kind, e.level) for e in lazy.events] == [(e.step, e.kind, e.level) for e in eager.events]
    assert lazy.to_bytes() == eager.to_bytes()


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_edge_set_decomposition(seed, k):
    """G = (snapshot at last buffer reset minus later deletions of its edges) plus G'."""
    n = 16
    cfg = StreamConfig(n=n, m=40, L=6, k=k, seed=seed)
    toks, _ = random_turnstile(n, 120, 6, seed, delete_prob=0.4)
    alg = SwitchingColorer(cfg, sketch="exact")
    g = GroundTruthGraph(n)
    snapshot, F = set(), set()
    seen = 0
    for t in toks:
        g.apply(t)
        if t.op.value == "d" and t.edge in snapshot:
            F.add(t.edge)
        alg.process(t)
        alg.query()
        if len(alg.events) > seen:
            seen = len(alg.events)
            snapshot, F = set(g.edges()), set()
        assert (snapshot - F) | set(alg.buffer.edges()) == set(g.edges())


@given(st.integers(0, 10**6))
def test_exact_inner_color_bound(seed):
    n = 24
    cfg = StreamConfig(n=n, m=120, L=8, seed=seed)
    toks, _ = random_turnstile(n, 120, 8, seed, delete_prob=0.35)
    alg = SwitchingColorer(cfg, sketch="exact")
    g = GroundTruthGraph(n)
    for t in toks:
        g.apply(t)
        alg.process(t)
        c = alg.query()
        d = g.max_degree
        assert is_proper(c, g)
        assert count_colors(c) <= (2 * d + 1) * (d + 1)


def test_adhoc_count_between_regular_checkpoints():
    n, k = 64, 2
    cfg = StreamConfig(n=n, m=4000, L=20, k=k, seed=6)
    alg = SwitchingColorer(cfg, sketch="exact")
    run_game(alg, RandomAdversary(cfg, 3, steps=4000, delete_prob=0.5), cfg)
    cap = math.ceil(math.log(n) / math.log(1 + 1 / (2 * k)))
    for level in range(1, k):
        run = 0
        for e in alg.events:
            if e.level < level or (e.level == level and e.kind != ADHOC):
                run = 0
            elif e.level == level:
                run += 1
                assert run <= cap


def test_space_proxy_resets_buffer():
    alg, _ = star_then_prune(2)
    assert alg.buffer.edge_count == 0
    assert alg.space_proxy() >= alg.cfg.n
    assert alg.peak_space >= alg.space_proxy()
