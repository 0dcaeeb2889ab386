from __future__ import annotations

import csv
import io
import json

import pytest

from conftest import IMPORTANCE_ROWS, graph_with_degrees
from influgraph import snapshot
from influgraph.cli import main
from influgraph.graph import EdgeKind, InteractionGraph, UserProfile, VertexKind
from influgraph.synthetic import CaptureSpec, generate_capture


def _record(tid, author, *mentions):
    return json.dumps({"tweet_id": str(tid), "author": {"screen_name": author}, "mentioned_users": list(mentions)})


TRIANGLE_RECORDS = [
    _record(1, "a", "b"), _record(2, "b", "c"), _record(3, "c", "a"),
    _record(4, "d", "e"), _record(5, "e", "f"), _record(6, "f", "d"),
]


def _ingest(tmp_path, lines, seeds="a\n", name="g"):
    rec = tmp_path / f"{name}.jsonl"
    rec.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    seed_file = tmp_path / f"{name}.seeds"
    seed_file.write_text(seeds, encoding="utf-8")
    out = tmp_path / name
    rc = main(["ingest", "--records", str(rec), "--seeds", str(seed_file), "--out", str(out)])
    return rc, out


def _stats(out):
    with open(out / "stats.csv", encoding="utf-8") as fh:
        return dict(csv.reader(fh))


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["rank"]) == 1
    assert main(["rank", "--graph", "x", "--by", "fame"]) == 1
    assert main(["communities", "--graph", "x", "--out", "y", "--seed", "-4"]) == 1
    assert main(["--help"]) == 0


def test_ingest_writes_snapshot_and_stats(tmp_path):
    rc, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert rc == 0
    stats = _stats(out)
    assert stats["User"] == "6" and stats["Tweet"] == "6" and stats["total_vertices"] == "12"
    g = snapshot.load(out / "graph.igz")
    assert g.n_vertices == 12


def test_ingest_hundred_records_matches_manifest(tmp_path):
    spec = CaptureSpec(n_records=100, n_users=50, n_external_tweets=20, n_hashtags=20, n_links=8, n_media=10, seed=7)
    lines, manifest = generate_capture(spec)
    rc, out = _ingest(tmp_path, lines, seeds="\n".join(spec.seeds))
    assert rc == 0
    stats = _stats(out)
    for kind, n in manifest["counts"].items():
        assert int(stats[kind]) == n
    assert int(stats["total_vertices"]) == manifest["total_vertices"]
    assert int(stats["total_edges"]) == manifest["total_edges"]


def test_empty_records_file_warns_and_succeeds(tmp_path, caplog):
    rc, out = _ingest(tmp_path, [])
    assert rc == 0
    assert "empty" in caplog.text
    assert snapshot.load(out / "graph.igz").n_vertices == 0
    assert _stats(out)["total_vertices"] == "0"


def test_missing_inputs_exit_2(tmp_path, caplog):
    rec = tmp_path / "r.jsonl"
    rec.write_text(TRIANGLE_RECORDS[0] + "\n")
    assert main(["ingest", "--records", str(rec), "--seeds", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 2
    assert "seeds" in caplog.text
    seeds = tmp_path / "s.txt"
    seeds.write_text("a\n")
    assert main(["ingest", "--records", str(tmp_path / "nope"), "--seeds", str(seeds), "--out", str(tmp_path / "o")]) == 2
    seeds.write_text("# nobody\n")
    assert main(["ingest", "--records", str(rec), "--seeds", str(seeds), "--out", str(tmp_path / "o")]) == 2
    assert main(["stats", "--graph", str(tmp_path / "missing.igz")]) == 2
    bad = tmp_path / "bad.igz"
    bad.write_bytes(b"hello")
    assert main(["rank", "--graph", str(bad)]) == 2


def test_too_many_bad_lines_exit_2(tmp_path):
    lines = TRIANGLE_RECORDS[:5] + ["{broken"]
    rc, out = _ingest(tmp_path, lines)
    assert rc == 2
    assert not (out / "graph.igz").exists()

    rc, out = _ingest(tmp_path, TRIANGLE_RECORDS * 2 + ["{broken"], name="ok")  # 1 of 13 lines
    assert rc == 0


def test_stats_to_stdout(tmp_path, capsys):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    capsys.readouterr()
    assert main(["stats", "--graph", str(out / "graph.igz")]) == 0
    text = capsys.readouterr().out
    assert text.startswith("metric,value\n")
    assert "Hashtag,0\n" in text


def _save(tmp_path, g, name="fixture.igz"):
    path = tmp_path / name
    snapshot.save(g, path)
    return path


def _rank(path, capsys, *flags):
    capsys.readouterr()
    assert main(["rank", "--graph", str(path), *flags]) == 0
    return list(csv.reader(io.StringIO(capsys.readouterr().out)))


def test_rank_degree_first_row_is_max_degree_user(tmp_path, capsys):
    g = InteractionGraph()
    for handle, k in [("jairbolsonaro", 12148), ("haddad_fernando", 4742), ("cirogomes", 3135)]:
        c = g.add_vertex(VertexKind.USER, handle, UserProfile(handle, followers_count=k))
        for i in range(k):
            g.add_edge(g.add_vertex(VertexKind.TWEET, f"{handle}-{i}"), c, EdgeKind.MENTIONS)
    rows = _rank(_save(tmp_path, g.freeze()), capsys, "--by", "degree", "--top", "20")
    assert rows[0] == ["rank", "screen_name", "followers", "friends", "degree", "importance"]
    assert (rows[1][1], rows[1][4]) == ("jairbolsonaro", "12148")
    assert len(rows) == 4


def test_rank_top_zero_is_header_only(tmp_path, capsys):
    path = _save(tmp_path, graph_with_degrees(IMPORTANCE_ROWS))
    capsys.readouterr()
    assert main(["rank", "--graph", str(path), "--top", "0"]) == 0
    assert capsys.readouterr().out == "rank,screen_name,followers,friends,degree,importance\n"


def test_rank_importance_compat_mode_reproduces_top_three(tmp_path, capsys):
    path = _save(tmp_path, graph_with_degrees(IMPORTANCE_ROWS))
    rows = _rank(path, capsys, "--by", "importance", "--inorm-divisor", "1", "--top", "3")
    assert [r[1] for r in rows[1:]] == ["marcelotas", "jairbolsonaro", "realdonaldtrump"]


def test_rank_writes_file(tmp_path):
    path = _save(tmp_path, graph_with_degrees(IMPORTANCE_ROWS))
    assert main(["rank", "--graph", str(path), "--out", str(tmp_path / "r"), "--by", "degree"]) == 0
    assert (tmp_path / "r" / "rank_degree.csv").read_bytes().endswith(b"\n")


def test_rank_without_users_is_analysis_error(tmp_path):
    g = InteractionGraph()
    g.add_vertex(VertexKind.HASHTAG, "x")
    assert main(["rank", "--graph", str(_save(tmp_path, g.freeze()))]) == 3


def _communities(graph, out, *flags):
    return main(["communities", "--graph", str(graph), "--out", str(out), *flags])


def test_communities_two_triangles(tmp_path, capsys):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    capsys.readouterr()
    assert _communities(out / "graph.igz", tmp_path / "c") == 0
    assert capsys.readouterr().out.startswith("Q=0.500000 communities=2 ")
    summary = (tmp_path / "c" / "summary.txt").read_text()
    assert summary.startswith("Q=0.500000 communities=2 generations=")
    assert "sizes=3 3\n" in summary
    rows = list(csv.reader(open(tmp_path / "c" / "communities.csv")))
    assert rows[0] == ["vertex_key", "kind", "community"]
    groups = {}
    for key, _, c in rows[1:]:
        groups.setdefault(c, set()).add(key)
    assert sorted(map(sorted, groups.values())) == [["a", "b", "c"], ["d", "e", "f"]]


def test_communities_same_seed_byte_identical(tmp_path):
    spec = CaptureSpec(n_records=300, n_users=120, n_external_tweets=60, seed=3)
    lines, _ = generate_capture(spec)
    _, out = _ingest(tmp_path, lines, seeds="\n".join(spec.seeds))
    flags = ["--seed", "99", "--generations", "5"]
    assert _communities(out / "graph.igz", tmp_path / "c1", *flags) == 0
    assert _communities(out / "graph.igz", tmp_path / "c2", *flags, "--workers", "3") == 0
    for name in ("communities.csv", "summary.txt"):
        assert (tmp_path / "c1" / name).read_bytes() == (tmp_path / "c2" / name).read_bytes()


def test_communities_oversized_core_equals_no_core(tmp_path):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert _communities(out / "graph.igz", tmp_path / "a", "--seed", "5") == 0
    assert _communities(out / "graph.igz", tmp_path / "b", "--seed", "5", "--top-core", "1000") == 0
    for name in ("communities.csv", "summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_communities_core_restricts_users(tmp_path):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert _communities(out / "graph.igz", tmp_path / "a", "--top-core", "3") == 0
    rows = list(csv.reader(open(tmp_path / "a" / "communities.csv")))
    assert len(rows) - 1 <= 3


def test_communities_without_edges_is_analysis_error(tmp_path):
    _, out = _ingest(tmp_path, [_record(1, "a"), _record(2, "b")])
    assert _communities(out / "graph.igz", tmp_path / "c") == 3


def test_communities_bad_config_is_input_error(tmp_path):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert _communities(out / "graph.igz", tmp_path / "c", "--population", "2") == 2


@pytest.mark.parametrize("fmt", ["gexf", "dot", "csv"])
def test_export_formats(tmp_path, fmt):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert main(["export", "--graph", str(out / "graph.igz"), "--out", str(tmp_path / "x"), "--format", fmt]) == 0
    text = (tmp_path / "x" / f"graph.{fmt}").read_text()
    assert text.endswith("\n")
    if fmt == "csv":
        assert text.splitlines()[0] == "src_key,dst_key,kind,weight"
        assert len(text.splitlines()) == 7


def test_export_with_communities(tmp_path):
    import networkx as nx

    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    graph = str(out / "graph.igz")
    assert _communities(graph, tmp_path / "c") == 0
    assert main(["export", "--graph", graph, "--out", str(tmp_path / "x"),
                 "--with-communities", str(tmp_path / "c" / "communities.csv")]) == 0
    parsed = nx.read_gexf(tmp_path / "x" / "graph.gexf")
    labels = {d["label"]: d["community"] for _, d in parsed.nodes(data=True)}
    assert labels["a"] == labels["b"] == labels["c"] != labels["d"] == labels["e"] == labels["f"]


def test_export_unknown_community_vertex_is_input_error(tmp_path):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    bad = tmp_path / "bad.csv"
    bad.write_text("vertex_key,kind,community\nzzz,User,0\n")
    rc = main(["export", "--graph", str(out / "graph.igz"), "--out", str(tmp_path / "x"),
               "--with-communities", str(bad)])
    assert rc == 2


def test_export_unknown_format_is_usage_error(tmp_path):
    _, out = _ingest(tmp_path, TRIANGLE_RECORDS)
    assert main(["export", "--graph", str(out / "graph.igz"), "--out", str(tmp_path / "x"), "--format", "png"]) == 1
