"""Modularity, the follower/friend importance score and user rankings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .graph import (
    GraphError,
    InteractionGraph,
    UndirectedGraph,
    UserProfile,
    VertexKind,
    induced_subgraph,
    user_projection,
    weakly_connected_components,
)


class UndefinedModularityError(ValueError):
    """Modularity is undefined on a graph without edges (m = 0)."""


class DegenerateGraphError(ValueError):
    """Importance normalisation needs a positive follower and friend maximum."""


# -- partitions ----------------------------------------------------------------


@dataclass
class Partition:
    """Community label per vertex."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if len(self.labels) and self.labels.min() < 0:
            raise ValueError("community labels must be non-negative")

    @property
    def community_count(self) -> int:
        return len(np.unique(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def canonical(self) -> "Partition":
        """Relabel to 0..c-1 in order of first appearance by vertex id."""
        return Partition(canonical_labels(self.labels))

    def communities(self) -> list[list[int]]:
        canon = canonical_labels(self.labels)
        groups: list[list[int]] = [[] for _ in range(int(canon.max()) + 1 if len(canon) else 0)]
        for v, c in enumerate(canon.tolist()):
            groups[c].append(v)
        return groups

    def sizes(self) -> list[int]:
        """Community sizes, largest first."""
        return sorted((len(c) for c in self.communities()), reverse=True)


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        return labels.copy()
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


# -- modularity ----------------------------------------------------------------


def modularity(g: UndirectedGraph, p: Partition) -> float:
    """Weighted Newman modularity of ``p`` on ``g``.

    Uses the per-community form ``sum_c [in_c / 2m - (tot_c / 2m)^2]`` where
    ``in_c`` counts every intra-community edge from both endpoints.
    """
    m = g.total_weight
    if m <= 0:
        raise UndefinedModularityError("graph has no edges (m = 0)")
    labels = p.labels
    if len(labels) != g.n:
        raise ValueError(f"partition covers {len(labels)} vertices, graph has {g.n}")
    size = int(labels.max()) + 1
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    same = labels[rows] == labels[g.indices]
    sigma_in = np.bincount(labels[rows[same]], weights=g.weights[same], minlength=size)
    sigma_tot = np.bincount(labels, weights=g.strengths, minlength=size)
    two_m = 2.0 * m
    return float(sigma_in.sum() / two_m - np.sum((sigma_tot / two_m) ** 2))


class ModularityContext:
    """Mutable bookkeeping for O(degree) modularity updates under single-vertex moves.

    Labels live in ``0..n-1``; any label not currently used is an empty
    community that a vertex may move into.
    """

    def __init__(self, g: UndirectedGraph, p: Partition):
        self.g = g
        self.m = g.total_weight
        if self.m <= 0:
            raise UndefinedModularityError("graph has no edges (m = 0)")
        labels = p.labels.copy()
        if len(labels) != g.n:
            raise ValueError(f"partition covers {len(labels)} vertices, graph has {g.n}")
        if len(labels) and labels.max() >= g.n:
            labels = canonical_labels(labels)
        self.labels = labels
        self.strengths = g.strengths
        rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
        same = labels[rows] == labels[g.indices]
        self.sigma_in = np.bincount(labels[rows[same]], weights=g.weights[same], minlength=g.n)
        self.sigma_tot = np.bincount(labels, weights=self.strengths, minlength=g.n)

    def _check_label(self, label: int) -> None:
        if not 0 <= label < self.g.n:
            raise ValueError(f"unknown community label {label}")

    def link_weight(self, v: int, label: int) -> float:
        """Total weight from ``v`` to members of ``label`` other than ``v``."""
        lo, hi = self.g.indptr[v], self.g.indptr[v + 1]
        nbrs = self.g.indices[lo:hi]
        return float(self.g.weights[lo:hi][self.labels[nbrs] == label].sum())

    def delta(self, v: int, src: int, dst: int) -> float:
        self._check_label(src)
        self._check_label(dst)
        if self.labels[v] != src:
            raise ValueError(f"vertex {v} is in community {self.labels[v]}, not {src}")
        if src == dst:
            return 0.0
        k = self.strengths[v]
        m = self.m
        gain = (self.link_weight(v, dst) - self.link_weight(v, src)) / m
        penalty = k * (self.sigma_tot[dst] - self.sigma_tot[src] + k) / (2.0 * m * m)
        return float(gain - penalty)

    def move(self, v: int, dst: int) -> None:
        self._check_label(dst)
        src = int(self.labels[v])
        if src == dst:
            return
        k = self.strengths[v]
        self.sigma_in[src] -= 2.0 * self.link_weight(v, src)
        self.sigma_in[dst] += 2.0 * self.link_weight(v, dst)
        self.sigma_tot[src] -= k
        self.sigma_tot[dst] += k
        self.labels[v] = dst

    def q(self) -> float:
        two_m = 2.0 * self.m
        return float(self.sigma_in.sum() / two_m - np.sum((self.sigma_tot / two_m) ** 2))

    def partition(self) -> Partition:
        return Partition(self.labels.copy())


def modularity_delta(ctx: ModularityContext, v: int, from_label: int, to_label: int) -> float:
    """Change in modularity if ``v`` moves from ``from_label`` to ``to_label``."""
    return ctx.delta(v, from_label, to_label)


# -- importance ----------------------------------------------------------------


@dataclass(frozen=True)
class ImportanceScore:
    vertex: int
    k: int
    followers_norm: float
    friends_norm: float
    inorm: float
    importance: float


def importance(
    profile: UserProfile,
    k: int,
    max_followers: int,
    max_friends: int,
    inorm_divisor: int = 2,
    vertex: int = -1,
) -> ImportanceScore:
    """Degree weighted by normalised follower and friend reach.

    ``inorm = (followers/max_followers + friends/max_friends) / inorm_divisor``
    and ``importance = k * inorm``. Divisor 2 averages the two ratios; divisor
    1 reproduces the published ranking values.
    """
    if max_followers <= 0 or max_friends <= 0:
        raise DegenerateGraphError("max_followers and max_friends must be positive")
    if inorm_divisor not in (1, 2):
        raise ValueError("inorm_divisor must be 1 or 2")
    fol = profile.followers_count / max_followers
    fri = profile.friends_count / max_friends
    inorm = (fol + fri) / inorm_divisor
    return ImportanceScore(vertex, int(k), fol, fri, inorm, k * inorm)


def user_maxima(g: InteractionGraph) -> tuple[int, int]:
    """Largest follower and friend counts over the User vertices of ``g``."""
    max_fol = max((p.followers_count for p in g.profiles.values()), default=0)
    max_fri = max((p.friends_count for p in g.profiles.values()), default=0)
    return max_fol, max_fri


def importance_scores(g: InteractionGraph, inorm_divisor: int = 2) -> dict[int, ImportanceScore]:
    """Importance of every User vertex, with ``k`` the unweighted total degree in ``g``."""
    max_fol, max_fri = user_maxima(g)
    # a zero maximum means every user has ratio 0 on that axis
    max_fol, max_fri = max_fol or 1, max_fri or 1
    return {
        v: importance(p, g.degree(v), max_fol, max_fri, inorm_divisor, vertex=v)
        for v, p in g.profiles.items()
    }


@dataclass(frozen=True)
class RankRow:
    rank: int
    vertex: int
    screen_name: str
    followers: int
    friends: int
    degree: int
    importance: float


def rank_users(
    g: InteractionGraph, by: str = "importance", top: int = 20, inorm_divisor: int = 2
) -> list[RankRow]:
    """Users sorted descending by degree or importance; ties go to the lower id."""
    if by not in ("degree", "importance"):
        raise ValueError(f"unknown ranking key {by!r}")
    if not g.profiles:
        raise GraphError("graph has no User vertices")
    scores = importance_scores(g, inorm_divisor)
    if by == "degree":
        order = sorted(scores, key=lambda v: (-scores[v].k, v))
    else:
        order = sorted(scores, key=lambda v: (-scores[v].importance, v))
    rows = []
    for rank, v in enumerate(order[: max(top, 0)], start=1):
        p = g.profiles[v]
        s = scores[v]
        rows.append(RankRow(rank, v, p.screen_name, p.followers_count, p.friends_count, s.k, s.importance))
    return rows


RANK_HEADER = ["rank", "screen_name", "followers", "friends", "degree", "importance"]


def rank_csv(rows: list[RankRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RANK_HEADER)
    for r in rows:
        w.writerow([r.rank, r.screen_name, r.followers, r.friends, r.degree, f"{r.importance:.6f}"])
    return buf.getvalue()


def importance_core(g: InteractionGraph, top: int, inorm_divisor: int = 2) -> InteractionGraph:
    """Largest weak component among the ``top`` most important projected users.

    Importance uses degrees and maxima from the full graph ``g``; selection
    and connectivity are taken on its user projection.
    """
    if top < 1:
        raise ValueError("top must be >= 1")
    proj = user_projection(g)
    if proj.n_vertices == 0:
        raise GraphError("user projection is empty")
    scores = importance_scores(g, inorm_divisor)
    ranked = []
    for pv in range(proj.n_vertices):
        gv = g.vertex_id(VertexKind.USER, proj.keys[pv])
        ranked.append((-scores[gv].importance, gv, pv))
    ranked.sort()
    chosen = [pv for _, _, pv in ranked[:top]]
    sub = induced_subgraph(proj, chosen)
    largest = weakly_connected_components(sub)[0]
    return induced_subgraph(sub, largest)
