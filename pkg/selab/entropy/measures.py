"""
Structural entropy of a graph under an encoding tree (bits).
"""

import numpy as np

from selab.core.exceptions import EmptyGraphError, RootNodeError
from selab.graph.bipartite import BipartiteGraph

from .encoding_tree import EncodingTree


def _term(cut: float, volume: float, parent_volume: float, total_volume: float) -> float:
    if cut <= 0.0:
        return 0.0
    return -(cut / total_volume) * float(np.log2(volume / parent_volume))


def node_entropy(g: BipartiteGraph, t: EncodingTree, node_id: int) -> float:
    """``-(g_a / V) log2(V_a / V_parent)`` for a non-root node."""
    node = t.node(node_id)
    if node.parent is None:
        raise RootNodeError()
    total = t.total_volume
    if total <= 0.0:
        raise EmptyGraphError()
    return _term(node.cut, node.volume, t.node(node.parent).volume, total)


def tree_entropy(g: BipartiteGraph, t: EncodingTree) -> float:
    """Sum of node entropies over every non-root node."""
    total = t.total_volume
    if total <= 0.0:
        raise EmptyGraphError()
    return float(
        sum(_term(n.cut, n.volume, t.node(n.parent).volume, total) for n in t.non_root_nodes())  # type: ignore[arg-type]
    )


def one_dim_entropy(g: BipartiteGraph) -> float:
    """Entropy of the single-layer tree, i.e. the Shannon entropy of ``d_v / V``."""
    degrees = g.degrees
    total = float(degrees.sum())
    if total <= 0.0:
        raise EmptyGraphError()
    p = degrees[degrees > 0.0] / total
    return float(-(p * np.log2(p)).sum())


def raw_degree_entropy(g: BipartiteGraph) -> float:
    """Unnormalized ``-sum d_v log2 d_v`` over vertices with positive degree."""
    degrees = g.degrees
    if degrees.sum() <= 0.0:
        raise EmptyGraphError()
    d = degrees[degrees > 0.0]
    return float(-(d * np.log2(d)).sum())
