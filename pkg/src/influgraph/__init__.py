"""Interaction-graph construction, influence ranking and memetic community detection."""

from .graph import (
    Edge,
    EdgeKind,
    GraphError,
    InteractionGraph,
    UndirectedGraph,
    UserProfile,
    VertexKind,
    induced_subgraph,
    undirected_view,
    user_projection,
    weakly_connected_components,
)
from .metrics import (
    ImportanceScore,
    ModularityContext,
    Partition,
    importance,
    importance_core,
    modularity,
    modularity_delta,
    rank_users,
)

__version__ = "0.1.0"
