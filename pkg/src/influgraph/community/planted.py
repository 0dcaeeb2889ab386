from __future__ import annotations

from typing import Sequence

import numpy as np

from ..graph import UndirectedGraph
from ..metrics import Partition


def planted_partition_graph(
    blocks: Sequence[int], p_in: float, p_out: float, rng_seed: int = 0
) -> tuple[UndirectedGraph, Partition]:
    """Random unit-weight graph with known block structure.

    Each pair inside a block is joined with probability ``p_in`` and each
    pair across blocks with ``p_out``, independently.
    """
    if not blocks or any(int(b) < 1 for b in blocks):
        raise ValueError("every block needs at least one vertex")
    if not (0.0 <= p_out <= 1.0 and 0.0 <= p_in <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if not p_in > p_out:
        raise ValueError("p_in must exceed p_out")
    membership = np.repeat(np.arange(len(blocks)), np.asarray(blocks, dtype=np.int64))
    n = len(membership)
    rng = np.random.default_rng(rng_seed)
    u, v = np.triu_indices(n, k=1)
    prob = np.where(membership[u] == membership[v], p_in, p_out)
    keep = rng.random(len(u)) < prob
    g = UndirectedGraph._from_arrays(n, u[keep], v[keep], np.ones(int(keep.sum())))
    return g, Partition(membership)
