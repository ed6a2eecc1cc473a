"""
Exhaustive two-layer entropy minimum for tiny graphs.

Every set partition of the vertices is a two-layer encoding tree (singleton
blocks are equivalent to bare leaves), so the minimum over all partitions is
the exact optimum the greedy optimizer is compared against.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sympy.utilities.iterables import multiset_partitions

from selab.core.exceptions import EmptyGraphError, EntropyError
from selab.core.logger_manager import get_logger
from selab.graph.bipartite import BipartiteGraph

from .measures import one_dim_entropy, tree_entropy
from .optimizer import optimize_tree

logger = get_logger(__name__)

ORACLE_MAX_VERTICES = 8


@dataclass(frozen=True)
class OracleResult:
    min_entropy: float
    partition: Tuple[Tuple[str, ...], ...]
    partitions_checked: int


@dataclass(frozen=True)
class OracleGap:
    greedy: float
    optimum: float
    single_layer: float

    @property
    def relative_gap(self) -> float:
        if self.optimum <= 0.0:
            return 0.0
        return (self.greedy - self.optimum) / self.optimum


def _adjacency(g: BipartiteGraph) -> np.ndarray:
    adj = np.zeros((g.num_vertices, g.num_vertices))
    posts = g.num_users + g.edge_posts
    adj[g.edge_users, posts] = g.weights
    adj[posts, g.edge_users] = g.weights
    return adj


def partition_entropy(adj: np.ndarray, blocks) -> float:
    """Two-layer entropy of the partition ``blocks`` (lists of vertex indices)."""
    degrees = adj.sum(axis=1)
    total = float(degrees.sum())
    entropy = 0.0
    for block in blocks:
        idx = np.asarray(block, dtype=np.int64)
        volume = float(degrees[idx].sum())
        if volume <= 0.0:
            continue
        cut = volume - float(adj[np.ix_(idx, idx)].sum())
        if cut > 0.0:
            entropy -= (cut / total) * np.log2(volume / total)
        d = degrees[idx]
        d = d[d > 0.0]
        entropy -= float(((d / total) * np.log2(d / volume)).sum())
    return float(entropy)


def entropy_oracle(g: BipartiteGraph, max_vertices: int = ORACLE_MAX_VERTICES) -> OracleResult:
    """Minimum two-layer entropy over every set partition of the vertices."""
    if g.num_vertices > max_vertices:
        raise EntropyError(
            f"oracle is limited to {max_vertices} vertices, graph has {g.num_vertices}",
            {"vertices": g.num_vertices},
        )
    if g.total_volume <= 0.0:
        raise EmptyGraphError()

    adj = _adjacency(g)
    best_value = np.inf
    best_blocks = None
    checked = 0
    for blocks in multiset_partitions(list(range(g.num_vertices))):
        checked += 1
        value = partition_entropy(adj, blocks)
        if value < best_value - 1e-15:
            best_value = value
            best_blocks = blocks
    partition = tuple(tuple(g.vertex_id(v) for v in block) for block in best_blocks or [])
    return OracleResult(min_entropy=float(best_value), partition=partition, partitions_checked=checked)


def oracle_gap(g: BipartiteGraph, tolerance: float = 1e-9) -> OracleGap:
    """Greedy K=2 entropy next to the exhaustive optimum and the single-layer entropy."""
    greedy = tree_entropy(g, optimize_tree(g, 2, tolerance=tolerance))
    result = entropy_oracle(g)
    gap = OracleGap(greedy=greedy, optimum=result.min_entropy, single_layer=one_dim_entropy(g))
    logger.debug(f"Oracle gap {gap.relative_gap:.4%} over {result.partitions_checked} partitions")
    return gap
