import csv
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_turnstile
from robustcolor.harness import (
    CSV_HEADER,
    AdversaryFault,
    ConflictFloodAdversary,
    FileAdversary,
    MonochromaticAdversary,
    ProperTracker,
    RandomAdversary,
    StaticModColorer,
    max_degree_tail_bound,
    random_graph_check,
    run_game,
    wilson_interval,
    write_transcript_csv,
)
from robustcolor.sketches import ExactBufferSketch
from robustcolor.stream import GroundTruthGraph, StreamConfig, delete, insert, is_proper


class Recorder(StaticModColorer):
    """Static colorer that logs the call order."""

    def __init__(self, cfg, K):
        super().__init__(cfg, K)
        self.calls = []

    def process(self, token):
        self.calls.append(("process", token))

    def query(self):
        self.calls.append(("query",))
        return super().query()


class Spy(FileAdversary):
    def __init__(self, tokens):
        super().__init__(tokens)
        self.seen = []

    def next_token(self, history):
        self.seen.append(len(history))
        return super().next_token(history)


def test_stop_on_first_call():
    cfg = StreamConfig(n=4, m=10, L=3)
    alg = Recorder(cfg, 2)
    tr = run_game(alg, FileAdversary([]), cfg)
    assert tr.tokens == [] and tr.queried == [True] and alg.calls == [("query",)]


def test_call_order_and_information_flow():
    cfg = StreamConfig(n=4, m=10, L=3)
    toks = [insert(0, 1), insert(1, 2)]
    alg, adv = Recorder(cfg, 4), Spy(toks)
    run_game(alg, adv, cfg)
    assert alg.calls == [("query",), ("process", toks[0]), ("query",), ("process", toks[1]), ("query",)]
    assert adv.seen == [1, 2, 3]


def test_oblivious_mode_hides_outputs():
    cfg = StreamConfig(n=4, m=10, L=3)
    adv = Spy([insert(0, 1), insert(1, 2)])
    tr = run_game(Recorder(cfg, 4), adv, cfg, query_every_token=False)
    assert adv.seen == [1, 1, 1]
    assert tr.queried == [True, False, True]


@given(st.integers(0, 10**6), st.floats(0, 0.6))
def test_random_vs_exact_always_proper(seed, p):
    cfg = StreamConfig(n=12, m=80, L=5, seed=seed)
    tr = run_game(ExactBufferSketch(cfg, seed), RandomAdversary(cfg, seed, delete_prob=p), cfg)
    assert tr.improper_count == 0 and not tr.failed
    assert max(tr.max_degree_trace) <= 5


def test_monochromatic_rule():
    cfg = StreamConfig(n=6, m=20, L=2)
    adv = MonochromaticAdversary(cfg)
    c = ((1,), (2,), (1,), (2,), (1,), (1,))
    assert adv.next_token([c]) == insert(0, 2)
    assert adv.next_token([c]) == insert(0, 4)
    # 0 is saturated now; (1,3) beats (2,4)
    assert adv.next_token([c]) == insert(1, 3)
    assert adv.next_token([c]) == insert(2, 4)
    assert adv.next_token([c]) is None


def test_monochromatic_stops_when_no_pair():
    cfg = StreamConfig(n=3, m=20, L=2)
    assert MonochromaticAdversary(cfg).next_token([((1,), (2,), (3,))]) is None


@pytest.mark.parametrize("K", [1, 2, 3, 5])
def test_static_colorer_broken_within_K_plus_1(K):
    n = K + 1
    cfg = StreamConfig(n=n, m=10, L=n - 1)
    tr = run_game(StaticModColorer(cfg, K), MonochromaticAdversary(cfg), cfg)
    first_bad = tr.proper_flags.index(False)
    assert 1 <= first_bad <= K + 1


def test_flood_opening_matches_monochromatic():
    cfg = StreamConfig(n=10, m=10, L=3)
    c = tuple((v % 3,) for v in range(10))
    assert ConflictFloodAdversary(cfg).next_token([c]) == MonochromaticAdversary(cfg).next_token([c])


def test_flood_prefers_low_degree():
    cfg = StreamConfig(n=6, m=10, L=4)
    adv = ConflictFloodAdversary(cfg)
    c = ((1,),) * 6
    toks = [adv.next_token([c]) for _ in range(3)]
    assert toks == [insert(0, 1), insert(2, 3), insert(4, 5)]
    assert max(adv.graph.degrees) == 1


@pytest.mark.parametrize(
    "toks, msg",
    [
        ([insert(0, 1), insert(0, 1)], "duplicate"),
        ([delete(0, 1)], "absent"),
        ([insert(0, 1), insert(0, 2), insert(0, 3)], "degree bound"),
        ([insert(0, 1), delete(0, 1), insert(0, 1), delete(0, 1), insert(1, 2)], "budget"),
    ],
)
def test_adversary_faults(toks, msg):
    cfg = StreamConfig(n=5, m=4, L=2)
    with pytest.raises(AdversaryFault, match=msg):
        run_game(ExactBufferSketch(cfg, 0), FileAdversary(toks), cfg)


@given(st.integers(0, 10**6))
def test_proper_tracker_matches_brute_force(seed):
    import random

    rng = random.Random(seed)
    n = 8
    toks, _ = random_turnstile(n, 40, 4, seed, delete_prob=0.4)
    g = GroundTruthGraph(n)
    tracker = ProperTracker(g)
    c = tuple((rng.randrange(3),) for _ in range(n))
    for t in toks:
        g.apply(t)
        if t.op.value == "i":
            tracker.inserted(t.u, t.v)
        if rng.random() < 0.5:
            c = list(c)
            c[rng.randrange(n)] = (rng.randrange(3),)
            c = tuple(c)
        assert tracker.check(c) == is_proper(c, g)


def _csv(tmp_path, name, seed):
    cfg = StreamConfig(n=16, m=60, L=4, seed=seed)
    tr = run_game(ExactBufferSketch(cfg, seed), RandomAdversary(cfg, seed, delete_prob=0.3), cfg)
    p = tmp_path / name
    write_transcript_csv(tr, p)
    return p.read_bytes(), tr


def test_csv_deterministic(tmp_path):
    a, tr = _csv(tmp_path, "a.csv", 7)
    b, _ = _csv(tmp_path, "b.csv", 7)
    assert a == b
    rows = list(csv.reader(a.decode().splitlines()))
    assert rows[0] == CSV_HEADER
    assert len(rows) == len(tr.tokens) + 2
    assert rows[1][:5] == ["0", "", "", "", "1"]


def test_tail_bound_value():
    assert max_degree_tail_bound(100, 5000, 0.1) == pytest.approx(200 * math.exp(-(0.01 / 3) * 100))


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.07
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - 0.5 == pytest.approx(0.5 - lo)


def test_random_graph_check_rejects_overfull():
    with pytest.raises(ValueError):
        random_graph_check(100, 5000, 0.1, 10)


def test_random_graph_check_complete_graph():
    res = random_graph_check(10, 45, 0.0, 5, seed=1)
    assert res.hits == 5 and res.frequency == 1.0


def test_random_graph_check_consistent():
    res = random_graph_check(200, 1000, 0.5, 200, seed=3)
    assert res.consistent
