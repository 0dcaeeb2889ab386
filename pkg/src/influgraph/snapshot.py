"""Versioned on-disk snapshot of an :class:`InteractionGraph`.

Layout: the magic bytes, one format-version byte, then a zlib-compressed
UTF-8 JSON document. Serialisation is deterministic, so equal graphs give
byte-identical files.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

from .graph import EdgeKind, InteractionGraph, UserProfile, VertexKind

MAGIC = b"INFLUGRAPH\x00"
FORMAT_VERSION = 1


class SnapshotError(ValueError):
    pass


def dumps(g: InteractionGraph) -> bytes:
    doc = {
        "directed": g.directed,
        "capture_window": list(g.capture_window) if g.capture_window else None,
        "vertices": [[k.value, key] for k, key in zip(g.kinds, g.keys)],
        "profiles": [
            [v, p.display_name, p.followers_count, p.friends_count, p.verified, p.location, p.is_seed]
            for v, p in sorted(g.profiles.items())
        ],
        "edges": [[e.src, e.dst, e.kind.value, e.weight] for e in g.edges()],
    }
    body = json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    return MAGIC + bytes([FORMAT_VERSION]) + zlib.compress(body, 6)


def loads(data: bytes) -> InteractionGraph:
    if not data.startswith(MAGIC):
        raise SnapshotError("not a graph snapshot (bad magic header)")
    version = data[len(MAGIC)] if len(data) > len(MAGIC) else None
    if version != FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    try:
        doc = json.loads(zlib.decompress(data[len(MAGIC) + 1:]).decode("utf-8"))
    except (zlib.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt snapshot: {exc}") from None

    profiles = {
        row[0]: row[1:] for row in doc["profiles"]
    }
    g = InteractionGraph(directed=doc["directed"])
    for v, (kind, key) in enumerate(doc["vertices"]):
        kind = VertexKind(kind)
        profile = None
        if kind is VertexKind.USER:
            display, fol, fri, verified, location, is_seed = profiles[v]
            profile = UserProfile(key, display, fol, fri, verified, location, is_seed)
        if g.add_vertex(kind, key, profile) != v:
            raise SnapshotError(f"duplicate vertex key {key!r}")
    for src, dst, kind, weight in doc["edges"]:
        g.add_edge(src, dst, EdgeKind(kind), weight)
    if doc.get("capture_window"):
        g.capture_window = tuple(doc["capture_window"])
    return g.freeze()


def save(g: InteractionGraph, path: str | Path) -> None:
    Path(path).write_bytes(dumps(g))


def load(path: str | Path) -> InteractionGraph:
    return loads(Path(path).read_bytes())
