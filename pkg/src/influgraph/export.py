"""Graph and community writers: GEXF, Graphviz DOT and CSV edge lists."""

from __future__ import annotations

import csv
import io
from typing import IO, Iterable, Mapping
from xml.sax.saxutils import quoteattr

from .graph import EDGE_ENDPOINTS, EdgeKind, GraphError, InteractionGraph, VertexKind

NODE_WIDTH_RANGE = (0.1, 2.0)
EDGE_CSV_HEADER = ["src_key", "dst_key", "kind", "weight"]
COMMUNITY_CSV_HEADER = ["vertex_key", "kind", "community"]


def scale_linear(values: Mapping[int, float], lo: float, hi: float) -> dict[int, float]:
    """Min-max map ``values`` onto ``[lo, hi]``; constant input maps to ``lo``."""
    if not values:
        return {}
    vmin, vmax = min(values.values()), max(values.values())
    span = vmax - vmin
    if span <= 0:
        return {v: lo for v in values}
    return {v: lo + (hi - lo) * (x - vmin) / span for v, x in values.items()}


def write_gexf(
    g: InteractionGraph,
    out: IO[str],
    communities: Mapping[int, int] | None = None,
    importance: Mapping[int, float] | None = None,
) -> None:
    """GEXF 1.2draft: directed edges with ``weight``, node attributes kind/community/importance."""
    communities = communities or {}
    importance = importance or {}
    w = out.write
    w('<?xml version="1.0" encoding="UTF-8"?>\n')
    w('<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">\n')
    w('  <graph mode="static" defaultedgetype="directed">\n')
    w('    <attributes class="node">\n')
    w('      <attribute id="kind" title="kind" type="string"/>\n')
    w('      <attribute id="community" title="community" type="integer"/>\n')
    w('      <attribute id="importance" title="importance" type="double"/>\n')
    w("    </attributes>\n")
    w('    <attributes class="edge">\n')
    w('      <attribute id="kind" title="kind" type="string"/>\n')
    w("    </attributes>\n")
    w("    <nodes>\n")
    for v, (kind, key) in enumerate(zip(g.kinds, g.keys)):
        w(f'      <node id="{v}" label={quoteattr(key)}>\n        <attvalues>\n')
        w(f'          <attvalue for="kind" value="{kind.value}"/>\n')
        w(f'          <attvalue for="community" value="{communities.get(v, -1)}"/>\n')
        w(f'          <attvalue for="importance" value="{importance.get(v, 0.0):.6f}"/>\n')
        w("        </attvalues>\n      </node>\n")
    w("    </nodes>\n    <edges>\n")
    for i, e in enumerate(g.edges()):
        w(f'      <edge id="{i}" source="{e.src}" target="{e.dst}" weight="{e.weight}">\n')
        w(f'        <attvalues><attvalue for="kind" value="{e.kind.value}"/></attvalues>\n')
        w("      </edge>\n")
    w("    </edges>\n  </graph>\n</gexf>\n")


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(
    g: InteractionGraph,
    out: IO[str],
    communities: Mapping[int, int] | None = None,
    importance: Mapping[int, float] | None = None,
) -> None:
    """Graphviz digraph; ``penwidth`` equals edge weight, node ``width`` is min-max scaled importance."""
    communities = communities or {}
    importance = importance or {}
    widths = scale_linear({v: importance.get(v, 0.0) for v in range(g.n_vertices)}, *NODE_WIDTH_RANGE)
    w = out.write
    w("digraph interactions {\n")
    for v, (kind, key) in enumerate(zip(g.kinds, g.keys)):
        w(
            f'  {v} [label={_dot_id(key)}, kind="{kind.value}", community={communities.get(v, -1)}, '
            f"importance={importance.get(v, 0.0):.6f}, width={widths[v]:.6f}];\n"
        )
    for e in g.edges():
        w(f'  {e.src} -> {e.dst} [kind="{e.kind.value}", weight={e.weight}, penwidth={float(e.weight):.6f}];\n')
    w("}\n")


def write_edge_csv(g: InteractionGraph, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EDGE_CSV_HEADER)
    for e in g.edges():
        writer.writerow([g.keys[e.src], g.keys[e.dst], e.kind.value, e.weight])


def read_edge_csv(stream: Iterable[str]) -> InteractionGraph:
    """Rebuild a graph from an edge list; endpoint kinds follow from each edge kind."""
    g = InteractionGraph()
    reader = csv.DictReader(stream)
    if reader.fieldnames != EDGE_CSV_HEADER:
        raise GraphError(f"edge list header must be {','.join(EDGE_CSV_HEADER)}")
    for row in reader:
        kind = EdgeKind(row["kind"])
        src_kind, dst_kind = EDGE_ENDPOINTS[kind]
        src = g.add_vertex(src_kind, row["src_key"])
        dst = g.add_vertex(dst_kind, row["dst_key"])
        g.add_edge(src, dst, kind, int(row["weight"]))
    return g.freeze()


def communities_csv(g: InteractionGraph, labels: Iterable[int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMMUNITY_CSV_HEADER)
    for v, c in enumerate(labels):
        writer.writerow([g.keys[v], g.kinds[v].value, int(c)])
    return buf.getvalue()


def read_communities_csv(g: InteractionGraph, stream: Iterable[str]) -> dict[int, int]:
    """Community per vertex of ``g``; rows naming unknown vertices are an error."""
    reader = csv.DictReader(stream)
    if reader.fieldnames != COMMUNITY_CSV_HEADER:
        raise GraphError(f"communities header must be {','.join(COMMUNITY_CSV_HEADER)}")
    out = {}
    for row in reader:
        v = g.vertex_id(VertexKind(row["kind"]), row["vertex_key"])
        if v is None:
            raise GraphError(f"communities file names unknown vertex {row['kind']}:{row['vertex_key']}")
        out[v] = int(row["community"])
    return out
