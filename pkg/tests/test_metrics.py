from __future__ import annotations

import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MAX_FOLLOWERS, MAX_FRIENDS, IMPORTANCE_ROWS, graph_with_degrees
from influgraph.graph import EdgeKind, InteractionGraph, UndirectedGraph, UserProfile, VertexKind
from influgraph.metrics import (
    DegenerateGraphError,
    ModularityContext,
    Partition,
    UndefinedModularityError,
    canonical_labels,
    importance,
    importance_core,
    modularity,
    modularity_delta,
    rank_csv,
    rank_users,
)
from oracles import dense_modularity, random_connected_edges, reachability_components

# -- partitions --------------------------------------------------------------------


def test_canonical_labels_first_appearance():
    np.testing.assert_array_equal(canonical_labels([7, 7, 3, 9, 3]), [0, 0, 1, 2, 1])
    p = Partition([5, 2, 5])
    assert p.community_count == 2
    assert p.sizes() == [2, 1]


def test_partition_rejects_negative():
    with pytest.raises(ValueError):
        Partition([0, -1])


# -- modularity --------------------------------------------------------------------------


def test_single_community_is_zero(rng):
    for _ in range(20):
        n = int(rng.integers(2, 12))
        g = UndirectedGraph.from_edges(n, random_connected_edges(rng, n, 0.4))
        assert modularity(g, Partition(np.zeros(n))) == 0.0


def test_barbell_triangles(barbell):
    q = modularity(barbell, Partition([0, 0, 0, 1, 1, 1]))
    assert q == pytest.approx(5 / 14, abs=1e-12)
    assert dense_modularity(barbell.to_dense(), [0, 0, 0, 1, 1, 1]) == pytest.approx(5 / 14, abs=1e-12)


def test_triangle_singletons():
    g = UndirectedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert modularity(g, Partition([0, 1, 2])) == pytest.approx(-1 / 3, abs=1e-12)
    assert dense_modularity(g.to_dense(), [0, 1, 2]) == pytest.approx(-1 / 3, abs=1e-12)


def test_modularity_requires_edges():
    with pytest.raises(UndefinedModularityError):
        modularity(UndirectedGraph.from_edges(3, []), Partition([0, 1, 2]))


def test_modularity_requires_full_cover(barbell):
    with pytest.raises(ValueError):
        modularity(barbell, Partition([0, 0, 0]))


@st.composite
def weighted_graph_and_labels(draw):
    n = draw(st.integers(2, 12))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    weights = draw(st.lists(st.integers(1, 5), min_size=len(chosen), max_size=len(chosen)))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    g = UndirectedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])
    return g, labels


@given(weighted_graph_and_labels())
@settings(max_examples=150, deadline=None)
def test_per_community_form_matches_double_sum(case):
    g, labels = case
    q = modularity(g, Partition(labels))
    assert q == pytest.approx(dense_modularity(g.to_dense(), labels), abs=1e-12)
    assert -0.5 - 1e-12 <= q <= 1.0


@given(weighted_graph_and_labels(), st.permutations(range(12)))
@settings(max_examples=80, deadline=None)
def test_relabeling_invariance(case, perm):
    g, labels = case
    relabeled = [perm[c] for c in labels]
    assert modularity(g, Partition(relabeled)) == pytest.approx(modularity(g, Partition(labels)), abs=1e-12)


@given(weighted_graph_and_labels(), st.floats(0.1, 50))
@settings(max_examples=80, deadline=None)
def test_weight_scaling_invariance(case, c):
    g, labels = case
    scaled = UndirectedGraph(g.indptr, g.indices, g.weights * c)
    assert modularity(scaled, Partition(labels)) == pytest.approx(modularity(g, Partition(labels)), abs=1e-12)


# -- incremental delta ----------------------------------------------------------------------


def test_delta_same_label_is_zero(barbell):
    ctx = ModularityContext(barbell, Partition([0, 0, 0, 1, 1, 1]))
    assert modularity_delta(ctx, 2, 0, 0) == 0.0


def test_delta_barbell_bridge_move(barbell):
    before = [0, 0, 0, 1, 1, 1]
    after = [0, 0, 1, 1, 1, 1]
    ctx = ModularityContext(barbell, Partition(before))
    d = modularity_delta(ctx, 2, 0, 1)
    oracle = dense_modularity(barbell.to_dense(), after) - dense_modularity(barbell.to_dense(), before)
    assert d < 0
    assert d == pytest.approx(oracle, abs=1e-12)
    assert d == pytest.approx(-23 / 98, abs=1e-12)


def test_delta_errors(barbell):
    ctx = ModularityContext(barbell, Partition([0, 0, 0, 1, 1, 1]))
    with pytest.raises(ValueError):
        modularity_delta(ctx, 2, 0, 99)
    with pytest.raises(ValueError):
        modularity_delta(ctx, 2, 1, 0)


def test_delta_matches_recompute_random_moves():
    rng = np.random.default_rng(8)
    n = 8
    g = UndirectedGraph.from_edges(n, [(u, v, float(rng.integers(1, 4))) for u, v in random_connected_edges(rng, n, 0.45)])
    ctx = ModularityContext(g, Partition(rng.integers(0, 3, n)))
    for _ in range(1000):
        v = int(rng.integers(n))
        src = int(ctx.labels[v])
        dst = int(rng.integers(n))
        before = modularity(g, ctx.partition())
        d = modularity_delta(ctx, v, src, dst)
        ctx.move(v, dst)
        after = modularity(g, ctx.partition())
        assert d == pytest.approx(after - before, abs=1e-12)
        assert ctx.q() == pytest.approx(after, abs=1e-12)


# -- importance -------------------------------------------------------------------------


def test_importance_max_follower_row():
    s = importance(UserProfile("realdonaldtrump", followers_count=MAX_FOLLOWERS, friends_count=46), 12,
                   MAX_FOLLOWERS, MAX_FRIENDS, inorm_divisor=1)
    assert s.followers_norm == 1.0
    assert s.importance == pytest.approx(12.0007, abs=1e-4)
    assert s.importance == pytest.approx(12.000, rel=1e-3)


def test_importance_bolsonaro_row():
    s = importance(UserProfile("jairbolsonaro", followers_count=1_552_494, friends_count=228), 495,
                   MAX_FOLLOWERS, MAX_FRIENDS, inorm_divisor=1)
    assert s.importance == pytest.approx(14.00, abs=5e-3)
    assert s.importance == pytest.approx(13.930, rel=0.01)


def test_importance_zero_counts():
    s = importance(UserProfile("nobody"), 40, 10, 10)
    assert s.importance == 0.0 and s.inorm == 0.0


def test_importance_degenerate_maxima():
    with pytest.raises(DegenerateGraphError):
        importance(UserProfile("a"), 1, 0, 5)
    with pytest.raises(DegenerateGraphError):
        importance(UserProfile("a"), 1, 5, 0)


def test_importance_divisor_halves():
    p = UserProfile("a", followers_count=300, friends_count=20)
    one = importance(p, 7, 1000, 100, inorm_divisor=1)
    two = importance(p, 7, 1000, 100, inorm_divisor=2)
    assert two.importance == pytest.approx(one.importance / 2)
    assert 0 <= two.followers_norm <= 1 and 0 <= two.friends_norm <= 1


# -- rankings ---------------------------------------------------------------------------


def test_rank_by_degree_order():
    g = graph_with_degrees([("a", 1, 1, 3), ("b", 1, 1, 5)])
    assert [r.screen_name for r in rank_users(g, by="degree", top=5)] == ["b", "a"]


def test_rank_ties_by_vertex_id():
    g = graph_with_degrees([("zed", 5, 5, 2), ("abe", 5, 5, 2)])
    rows = rank_users(g, by="importance")
    assert [r.screen_name for r in rows] == ["zed", "abe"]
    assert rows[0].vertex < rows[1].vertex


def test_rank_excludes_non_users_and_caps_rows(importance_rows_graph):
    rows = rank_users(importance_rows_graph, by="degree", top=3)
    assert len(rows) == 3
    assert rank_users(importance_rows_graph, top=100)[-1].rank == len(IMPORTANCE_ROWS)
    assert rank_users(importance_rows_graph, top=0) == []


def test_rank_published_importance_top3(importance_rows_graph):
    rows = rank_users(importance_rows_graph, by="importance", top=3, inorm_divisor=1)
    assert [r.screen_name for r in rows] == ["marcelotas", "jairbolsonaro", "realdonaldtrump"]


def test_largest_star_center_ranks_first():
    # the top of the published degree table, as mention stars of that size
    shape = [("jairbolsonaro", 1552494, 12148), ("haddad_fernando", 700361, 4742), ("cirogomes", 329801, 3135)]
    g = InteractionGraph()
    for handle, followers, k in shape:
        c = g.add_vertex(VertexKind.USER, handle, UserProfile(handle, followers_count=followers, friends_count=1))
        for i in range(k):
            t = g.add_vertex(VertexKind.TWEET, f"{handle}-{i}")
            g.add_edge(t, c, EdgeKind.MENTIONS)
    rows = rank_users(g, by="degree", top=20)
    assert (rows[0].screen_name, rows[0].degree) == ("jairbolsonaro", 12148)
    assert [r.degree for r in rows] == [12148, 4742, 3135]


def test_ranking_scale_and_divisor_invariance():
    rng = np.random.default_rng(3)
    rows = [(f"u{i}", int(rng.integers(0, 10**6)), int(rng.integers(0, 10**4)), int(rng.integers(1, 30))) for i in range(40)]
    base = [r.screen_name for r in rank_users(graph_with_degrees(rows), top=40, inorm_divisor=2)]
    scaled = [(h, f * 7, fr, k) for h, f, fr, k in rows]
    assert [r.screen_name for r in rank_users(graph_with_degrees(scaled), top=40, inorm_divisor=2)] == base
    assert [r.screen_name for r in rank_users(graph_with_degrees(rows), top=40, inorm_divisor=1)] == base


def test_rank_is_deterministic(importance_rows_graph):
    assert rank_users(importance_rows_graph) == rank_users(importance_rows_graph)


def test_rank_csv_format(importance_rows_graph):
    text = rank_csv(rank_users(importance_rows_graph, top=2, inorm_divisor=1))
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "rank,screen_name,followers,friends,degree,importance"
    row = next(csv.DictReader(io.StringIO(text)))
    assert row["screen_name"] == "marcelotas"
    assert len(row["importance"].split(".")[1]) == 6


# -- importance core ---------------------------------------------------------------------


def _interaction_capture(edges, profiles):
    """Full graph whose projection has exactly ``edges`` (u mentions v once per edge)."""
    g = InteractionGraph()
    ids = {name: g.add_vertex(VertexKind.USER, name, UserProfile(name, followers_count=f, friends_count=fr))
           for name, f, fr in profiles}
    for i, (u, v) in enumerate(edges):
        t = g.add_vertex(VertexKind.TWEET, f"t{i}")
        g.add_edge(ids[u], t, EdgeKind.POSTED)
        g.add_edge(t, ids[v], EdgeKind.MENTIONS)
    return g.freeze()


def test_core_with_top_above_user_count_is_largest_component():
    profiles = [(n, 10, 10) for n in "abcde"]
    g = _interaction_capture([("a", "b"), ("b", "c"), ("d", "e")], profiles)
    core = importance_core(g, 100)
    assert sorted(core.keys) == ["a", "b", "c"]


def test_core_size_tie_goes_to_smallest_id():
    profiles = [("a", 1, 1), ("b", 1, 1), ("c", 100, 100), ("d", 100, 100)]
    g = _interaction_capture([("a", "b"), ("c", "d")], profiles)
    core = importance_core(g, 4)
    assert sorted(core.keys) == ["a", "b"]


def test_core_planted_clique():
    clique = [f"vip{i}" for i in range(10)]
    others = [f"low{i}" for i in range(990)]
    profiles = [(n, 10**6, 10**4) for n in clique] + [(n, 1, 1) for n in others]
    edges = [(u, v) for u in clique for v in clique if u < v]
    # low users only interact with one another in isolated pairs
    edges += [(others[i], others[i + 1]) for i in range(0, 990, 2)]
    g = _interaction_capture(edges, profiles)
    core = importance_core(g, 10)
    assert sorted(core.keys) == sorted(clique)
    comps = reachability_components(core.n_vertices, [(e.src, e.dst) for e in core.edges()])
    assert len(comps) == 1


def test_core_rejects_bad_input():
    g = _interaction_capture([], [("a", 1, 1)])
    with pytest.raises(Exception):
        importance_core(g, 5)
    with pytest.raises(ValueError):
        importance_core(_interaction_capture([("a", "b")], [("a", 1, 1), ("b", 1, 1)]), 0)
