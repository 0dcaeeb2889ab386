"""Typed, directed, weighted interaction multigraph.

Vertices are dense integer ids. Each vertex has a kind and a dedup key that is
unique within its kind. Parallel edges of the same kind collapse into a single
edge whose weight counts repetitions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    """Raised on invalid graph construction or queries."""


class VertexKind(str, enum.Enum):
    USER = "User"
    TWEET = "Tweet"
    HASHTAG = "Hashtag"
    LINK = "Link"
    MEDIA = "Media"


class EdgeKind(str, enum.Enum):
    POSTED = "Posted"
    MENTIONS = "Mentions"
    RETWEET_OF = "RetweetOf"
    REPLY_TO = "ReplyTo"
    QUOTE_OF = "QuoteOf"
    HAS_HASHTAG = "HasHashtag"
    HAS_LINK = "HasLink"
    HAS_MEDIA = "HasMedia"
    INTERACTS = "Interacts"


#: Legal (src kind, dst kind) for every edge kind.
EDGE_ENDPOINTS: dict[EdgeKind, tuple[VertexKind, VertexKind]] = {
    EdgeKind.POSTED: (VertexKind.USER, VertexKind.TWEET),
    EdgeKind.MENTIONS: (VertexKind.TWEET, VertexKind.USER),
    EdgeKind.RETWEET_OF: (VertexKind.TWEET, VertexKind.TWEET),
    EdgeKind.REPLY_TO: (VertexKind.TWEET, VertexKind.TWEET),
    EdgeKind.QUOTE_OF: (VertexKind.TWEET, VertexKind.TWEET),
    EdgeKind.HAS_HASHTAG: (VertexKind.TWEET, VertexKind.HASHTAG),
    EdgeKind.HAS_LINK: (VertexKind.TWEET, VertexKind.LINK),
    EdgeKind.HAS_MEDIA: (VertexKind.TWEET, VertexKind.MEDIA),
    EdgeKind.INTERACTS: (VertexKind.USER, VertexKind.USER),
}

REFERENCE_KINDS = (EdgeKind.RETWEET_OF, EdgeKind.REPLY_TO, EdgeKind.QUOTE_OF)


@dataclass
class UserProfile:
    screen_name: str
    display_name: str = ""
    followers_count: int = 0
    friends_count: int = 0
    verified: bool = False
    location: str = ""
    is_seed: bool = False

    def __post_init__(self) -> None:
        self.screen_name = normalize_screen_name(self.screen_name)
        if not self.screen_name:
            raise GraphError("screen_name must be non-empty")
        if self.followers_count < 0 or self.friends_count < 0:
            raise GraphError("follower/friend counts must be non-negative")

    def merged(self, other: "UserProfile") -> "UserProfile":
        """Combine two observations of the same user.

        Counts take the maximum, flags are OR-ed and text fields keep the
        first non-empty value, so the result does not depend on which
        observation came first as far as counts go.
        """
        return replace(
            self,
            display_name=self.display_name or other.display_name,
            followers_count=max(self.followers_count, other.followers_count),
            friends_count=max(self.friends_count, other.friends_count),
            verified=self.verified or other.verified,
            location=self.location or other.location,
            is_seed=self.is_seed or other.is_seed,
        )


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: EdgeKind
    weight: int


def normalize_screen_name(name: str) -> str:
    return name.strip().lstrip("@").lower()


def normalize_key(kind: VertexKind, key: str) -> str:
    """Canonical dedup key for a vertex of ``kind``."""
    key = key.strip()
    if kind is VertexKind.USER:
        return normalize_screen_name(key)
    if kind is VertexKind.HASHTAG:
        return key.lstrip("#").casefold()
    return key


@dataclass
class InteractionGraph:
    """Directed weighted graph over typed vertices.

    Edges are stored once per ``(src, dst, kind)`` and indexed both by source
    and by destination, so in- and out-neighbourhoods are O(degree).
    """

    directed: bool = True
    kinds: list[VertexKind] = field(default_factory=list)
    keys: list[str] = field(default_factory=list)
    profiles: dict[int, UserProfile] = field(default_factory=dict)
    capture_window: tuple[str, str] | None = None
    _index: dict[tuple[VertexKind, str], int] = field(default_factory=dict, repr=False)
    _out: list[dict[tuple[int, EdgeKind], int]] = field(default_factory=list, repr=False)
    _in: list[dict[tuple[int, EdgeKind], int]] = field(default_factory=list, repr=False)
    _n_edges: int = 0
    _frozen: bool = False

    # -- construction -----------------------------------------------------

    def add_vertex(self, kind: VertexKind, key: str, profile: UserProfile | None = None) -> int:
        """Register a vertex, or return the id already assigned to ``(kind, key)``.

        A profile given for an existing user is max-merged into the stored one.
        """
        self._check_mutable()
        kind = VertexKind(kind)
        if profile is not None and kind is not VertexKind.USER:
            raise GraphError(f"profile supplied for non-User vertex kind {kind.value}")
        norm = normalize_key(kind, key)
        if not norm:
            raise GraphError("vertex key must be non-empty")
        vid = self._index.get((kind, norm))
        if vid is not None:
            if profile is not None:
                self.profiles[vid] = self.profiles[vid].merged(profile)
            return vid
        vid = len(self.kinds)
        self._index[(kind, norm)] = vid
        self.kinds.append(kind)
        self.keys.append(norm)
        self._out.append({})
        self._in.append({})
        if kind is VertexKind.USER:
            self.profiles[vid] = profile if profile is not None else UserProfile(norm)
        return vid

    def add_edge(self, src: int, dst: int, kind: EdgeKind, count: int = 1) -> int:
        """Add ``count`` repetitions of an edge and return its accumulated weight."""
        self._check_mutable()
        kind = EdgeKind(kind)
        self._check_vertex(src)
        self._check_vertex(dst)
        if count < 1:
            raise GraphError("edge count must be a positive integer")
        want_src, want_dst = EDGE_ENDPOINTS[kind]
        if self.kinds[src] is not want_src or self.kinds[dst] is not want_dst:
            raise GraphError(
                f"{kind.value} edge requires {want_src.value}->{want_dst.value}, "
                f"got {self.kinds[src].value}->{self.kinds[dst].value}"
            )
        if src == dst:
            raise GraphError(f"self-loop {kind.value} edge on vertex {src}")
        out = self._out[src]
        weight = out.get((dst, kind), 0)
        if weight == 0:
            self._n_edges += 1
        weight += count
        out[(dst, kind)] = weight
        self._in[dst][(src, kind)] = weight
        return weight

    def freeze(self) -> "InteractionGraph":
        """Disallow further mutation; returns ``self``."""
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_mutable(self) -> None:
        if self._frozen:
            raise GraphError("graph is frozen")

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < len(self.kinds):
            raise GraphError(f"unknown vertex id {v}")

    # -- queries ----------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.kinds)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def __len__(self) -> int:
        return len(self.kinds)

    def vertex_id(self, kind: VertexKind, key: str) -> int | None:
        return self._index.get((VertexKind(kind), normalize_key(VertexKind(kind), key)))

    def vertices_of_kind(self, kind: VertexKind) -> list[int]:
        return [v for v, k in enumerate(self.kinds) if k is kind]

    def kind_counts(self) -> dict[VertexKind, int]:
        counts = dict.fromkeys(VertexKind, 0)
        for k in self.kinds:
            counts[k] += 1
        return counts

    def edges(self) -> Iterator[Edge]:
        for src, out in enumerate(self._out):
            for (dst, kind), w in out.items():
                yield Edge(src, dst, kind, w)

    def out_edges(self, v: int) -> Iterator[Edge]:
        self._check_vertex(v)
        for (dst, kind), w in self._out[v].items():
            yield Edge(v, dst, kind, w)

    def in_edges(self, v: int) -> Iterator[Edge]:
        self._check_vertex(v)
        for (src, kind), w in self._in[v].items():
            yield Edge(src, v, kind, w)

    def edge_weight(self, src: int, dst: int, kind: EdgeKind) -> int:
        self._check_vertex(src)
        return self._out[src].get((dst, EdgeKind(kind)), 0)

    def degree(self, v: int, mode: str = "total", weighted: bool = False) -> int:
        self._check_vertex(v)
        if mode not in ("in", "out", "total"):
            raise GraphError(f"unknown degree mode {mode!r}")
        total = 0
        if mode in ("out", "total"):
            total += sum(self._out[v].values()) if weighted else len(self._out[v])
        if mode in ("in", "total"):
            total += sum(self._in[v].values()) if weighted else len(self._in[v])
        return total

    def degrees(self, mode: str = "total", weighted: bool = False) -> np.ndarray:
        return np.fromiter(
            (self.degree(v, mode, weighted) for v in range(self.n_vertices)),
            dtype=np.int64,
            count=self.n_vertices,
        )

    def author_of(self, tweet: int) -> int | None:
        """The user with a ``Posted`` edge into ``tweet`` (smallest id if several)."""
        authors = [src for (src, kind) in self._in[tweet] if kind is EdgeKind.POSTED]
        return min(authors) if authors else None

    def same_as(self, other: "InteractionGraph") -> bool:
        """Exact equality of vertices, profiles and weighted edges (ids included)."""
        return (
            self.kinds == other.kinds
            and self.keys == other.keys
            and self.profiles == other.profiles
            and sorted(self._edge_tuples()) == sorted(other._edge_tuples())
        )

    def _edge_tuples(self) -> list[tuple[int, int, str, int]]:
        return [(e.src, e.dst, e.kind.value, e.weight) for e in self.edges()]


# -- whole-graph operations -------------------------------------------------


def weakly_connected_components(g: InteractionGraph) -> list[set[int]]:
    """Vertex sets of the weak components, largest first, ties by smallest id."""
    n = g.n_vertices
    if n == 0:
        return []
    src, dst = _edge_arrays(g)
    adj = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    n_comp, labels = connected_components(adj, directed=True, connection="weak")
    members: list[list[int]] = [[] for _ in range(n_comp)]
    for v, c in enumerate(labels.tolist()):
        members[c].append(v)
    # members are filled in increasing id order, so m[0] is the smallest id
    members.sort(key=lambda m: (-len(m), m[0]))
    return [set(m) for m in members]


def induced_subgraph(g: InteractionGraph, keep: Iterable[int]) -> InteractionGraph:
    """Subgraph on ``keep`` with every edge between kept vertices.

    New ids follow the original id order; keys and profiles carry over.
    """
    keep_ids = sorted(set(keep))
    for v in keep_ids:
        g._check_vertex(v)
    sub = InteractionGraph(directed=g.directed, capture_window=g.capture_window)
    remap: dict[int, int] = {}
    for v in keep_ids:
        profile = g.profiles.get(v)
        remap[v] = sub.add_vertex(g.kinds[v], g.keys[v], replace(profile) if profile else None)
    for v in keep_ids:
        for (dst, kind), w in g._out[v].items():
            if dst in remap:
                sub.add_edge(remap[v], remap[dst], kind, w)
    return sub.freeze()


def user_projection(g: InteractionGraph) -> InteractionGraph:
    """User-to-user ``Interacts`` graph.

    ``u -> v`` accumulates the weight of every mention of ``v`` in a tweet
    posted by ``u`` and of every retweet/reply/quote by ``u`` of a tweet
    posted by ``v``. Self-interactions are dropped. Users with at least one
    projected edge are kept, as are seed users even when isolated.
    """
    authors: dict[int, list[int]] = {}
    for t, kind in enumerate(g.kinds):
        if kind is VertexKind.TWEET:
            posted = [src for (src, ek) in g._in[t] if ek is EdgeKind.POSTED]
            if posted:
                authors[t] = posted

    weights: dict[tuple[int, int], int] = {}
    for t, tweet_authors in authors.items():
        for (dst, ek), w in g._out[t].items():
            if ek is EdgeKind.MENTIONS:
                targets = [dst]
            elif ek in REFERENCE_KINDS:
                targets = authors.get(dst, [])
            else:
                continue
            for u in tweet_authors:
                for v in targets:
                    if u != v:
                        weights[(u, v)] = weights.get((u, v), 0) + w

    keep = {u for pair in weights for u in pair}
    keep.update(v for v, p in g.profiles.items() if p.is_seed)
    proj = InteractionGraph(directed=True, capture_window=g.capture_window)
    remap = {}
    for v in sorted(keep):
        remap[v] = proj.add_vertex(VertexKind.USER, g.keys[v], replace(g.profiles[v]))
    for (u, v), w in sorted(weights.items()):
        proj.add_edge(remap[u], remap[v], EdgeKind.INTERACTS, w)
    return proj.freeze()


def _edge_arrays(g: InteractionGraph) -> tuple[np.ndarray, np.ndarray]:
    src = np.fromiter((e.src for e in g.edges()), dtype=np.int64, count=g.n_edges)
    dst = np.fromiter((e.dst for e in g.edges()), dtype=np.int64, count=g.n_edges)
    return src, dst


@dataclass
class UndirectedGraph:
    """Undirected weighted graph in CSR form, the input to modularity and the solver.

    Every undirected edge appears twice in ``indices`` (once per endpoint).
    Self-loops are not representable.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def strengths(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return np.bincount(rows, weights=self.weights, minlength=self.n).astype(np.float64)

    @property
    def total_weight(self) -> float:
        """``m``: the sum of undirected edge weights."""
        return float(self.weights.sum()) / 2.0

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_list(self) -> list[tuple[int, int, float]]:
        out = []
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            for v, w in zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()):
                if u < v:
                    out.append((u, v, w))
        return out

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            a[u, self.indices[lo:hi]] = self.weights[lo:hi]
        return a

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int] | tuple[int, int, float]]) -> "UndirectedGraph":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; parallel edges add up."""
        us, vs, ws = [], [], []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop on vertex {u}")
            if w <= 0:
                raise GraphError("edge weights must be positive")
            us.append(u)
            vs.append(v)
            ws.append(w)
        return cls._from_arrays(
            n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64), np.asarray(ws, dtype=np.float64)
        )

    @classmethod
    def _from_arrays(cls, n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> "UndirectedGraph":
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([w, w])
        mat = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        return cls(
            indptr=mat.indptr.astype(np.int64),
            indices=mat.indices.astype(np.int64),
            weights=mat.data.astype(np.float64),
        )


def undirected_view(g: InteractionGraph) -> UndirectedGraph:
    """Collapse direction and edge kind; antiparallel edges add their weights."""
    src, dst = _edge_arrays(g)
    w = np.fromiter((e.weight for e in g.edges()), dtype=np.float64, count=g.n_edges)
    return UndirectedGraph._from_arrays(g.n_vertices, src, dst, w)
