from .memetic import (
    CommunityResult,
    Individual,
    MemeticConfig,
    crossover,
    detect_communities,
    local_search,
    mutate,
)
from .oracle import brute_force_best_partition
from .planted import planted_partition_graph

__all__ = [
    "CommunityResult",
    "Individual",
    "MemeticConfig",
    "brute_force_best_partition",
    "crossover",
    "detect_communities",
    "local_search",
    "mutate",
    "planted_partition_graph",
]
