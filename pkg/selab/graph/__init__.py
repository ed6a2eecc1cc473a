"""
Bipartite user-post graph: construction, weights, volumes and cuts.
"""

from .bipartite import (
    FAKE,
    REAL,
    BipartiteGraph,
    Subgraph,
    build_graph,
    cut,
    edge_weight,
    relabel_users,
    unweighted,
    volume,
    with_added_edges,
)
from .io import graph_from_dict, graph_to_dict, load_graph, load_graph_csv, save_graph
from .synthetic import generate_synthetic, planted_communities

__all__ = [
    "FAKE",
    "REAL",
    "BipartiteGraph",
    "Subgraph",
    "build_graph",
    "cut",
    "edge_weight",
    "relabel_users",
    "unweighted",
    "volume",
    "with_added_edges",
    "graph_from_dict",
    "graph_to_dict",
    "load_graph",
    "load_graph_csv",
    "save_graph",
    "generate_synthetic",
    "planted_communities",
]
