"""Exhaustive modularity maximisation for small graphs."""

from __future__ import annotations

from ..graph import UndirectedGraph
from ..metrics import Partition, UndefinedModularityError
from .kernels import best_partition_dense

MAX_BRUTE_FORCE_VERTICES = 12


def brute_force_best_partition(g: UndirectedGraph) -> tuple[Partition, float]:
    """Exact modularity maximiser over every set partition of ``g``'s vertices.

    Ties resolve to the first partition in restricted-growth-string order.
    Refuses graphs above 12 vertices (Bell(12) is about 4.2 million).
    """
    if g.n > MAX_BRUTE_FORCE_VERTICES:
        raise ValueError(f"brute force refused for {g.n} > {MAX_BRUTE_FORCE_VERTICES} vertices")
    if g.total_weight <= 0:
        raise UndefinedModularityError("graph has no edges (m = 0)")
    labels, q = best_partition_dense(g.to_dense())
    return Partition(labels), float(q)
