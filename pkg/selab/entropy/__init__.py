"""
Structural entropy, encoding trees and associated subgraphs.
"""

from .encoding_tree import ROOT, EncodingTree, TreeNode
from .measures import node_entropy, one_dim_entropy, raw_degree_entropy, tree_entropy
from .optimizer import DEFAULT_TOLERANCE, compress_delta, optimize_tree
from .oracle import OracleGap, OracleResult, entropy_oracle, oracle_gap, partition_entropy
from .subgraph import extract_subgraph

__all__ = [
    "ROOT",
    "EncodingTree",
    "TreeNode",
    "node_entropy",
    "one_dim_entropy",
    "raw_degree_entropy",
    "tree_entropy",
    "DEFAULT_TOLERANCE",
    "compress_delta",
    "optimize_tree",
    "OracleGap",
    "OracleResult",
    "entropy_oracle",
    "oracle_gap",
    "partition_entropy",
    "extract_subgraph",
]
