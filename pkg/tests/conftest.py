import random

import pytest
from hypothesis import settings

from robustcolor.stream import GroundTruthGraph, StreamConfig, delete, insert

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_turnstile(n, steps, L, seed, delete_prob=0.3):
    """Valid strict-turnstile token list with degrees capped at L."""
    rng = random.Random(seed)
    g = GroundTruthGraph(n)
    edges, out = [], []
    for _ in range(steps):
        if edges and rng.random() < delete_prob:
            e = edges.pop(rng.randrange(len(edges)))
            tok = delete(*e)
        else:
            for _ in range(50):
                u, v = rng.sample(range(n), 2)
                if not g.has_edge(u, v) and g.degrees[u] < L and g.degrees[v] < L:
                    break
            else:
                continue
            tok = insert(u, v)
            edges.append(tok.edge)
        g.apply(tok)
        out.append(tok)
    return out, g


@pytest.fixture
def small_cfg():
    return StreamConfig(n=16, m=200, L=6, seed=3)
