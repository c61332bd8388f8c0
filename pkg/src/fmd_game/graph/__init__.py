from .graph_io import (
    GraphStats,
    parse_temporal_edges,
    parse_text,
    read_edge_file,
    build_comm_graph,
    halve_graph,
    graph_stats,
    derive_privacy_loss,
)
from .centrality import (
    betweenness_centrality,
    degree_vector,
    top_k_ids,
    metric_to_csv,
)

__all__ = [
    "GraphStats",
    "parse_temporal_edges",
    "parse_text",
    "read_edge_file",
    "build_comm_graph",
    "halve_graph",
    "graph_stats",
    "derive_privacy_loss",
    "betweenness_centrality",
    "degree_vector",
    "top_k_ids",
    "metric_to_csv",
]
