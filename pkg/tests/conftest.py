from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from influgraph.graph import EdgeKind, InteractionGraph, UndirectedGraph, UserProfile, VertexKind  # noqa: E402
from oracles import barbell_edges  # noqa: E402

_ACCEPTANCE_KEY = pytest.StashKey[list]()

# rows of the published top-20 importance table: (handle, followers, friends, k, published importance).
# humbertotweets supplies the friend maximum; its own published value does not reproduce and is not asserted.
IMPORTANCE_ROWS = [
    ("marcelotas", 9570894, 2851, 236, 41.161),
    ("jairbolsonaro", 1552494, 228, 495, 13.930),
    ("realdonaldtrump", 55447023, 46, 12, 12.000),
    ("danilogentili", 16323088, 303, 22, 6.480),
    ("twittergov", 2458516, 28, 115, 5.101),
    ("humbertotweets", 827949, 792755, 3, 1.544),
]
MAX_FOLLOWERS = 55_447_023
MAX_FRIENDS = 792_755


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(criterion: str, ok: bool, detail: str) -> None:
        request.config.stash[_ACCEPTANCE_KEY].append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")

    return record


@pytest.fixture
def barbell() -> UndirectedGraph:
    return UndirectedGraph.from_edges(6, barbell_edges())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def graph_with_degrees(rows) -> InteractionGraph:
    """Users with given (handle, followers, friends, k); each posts k tweets so degree == k."""
    g = InteractionGraph()
    for handle, followers, friends, k, *_ in rows:
        u = g.add_vertex(VertexKind.USER, handle, UserProfile(handle, followers_count=followers, friends_count=friends))
        for i in range(k):
            t = g.add_vertex(VertexKind.TWEET, f"{handle}-{i}")
            g.add_edge(u, t, EdgeKind.POSTED)
    return g.freeze()


@pytest.fixture
def importance_rows_graph() -> InteractionGraph:
    return graph_with_degrees(IMPORTANCE_ROWS)
