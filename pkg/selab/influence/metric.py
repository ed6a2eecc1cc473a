"""
Entropy-derived network influence of user accounts.

The influence of a user sums, over the non-root nodes on its leaf-to-root
path, ``-(g_a / V) log2(c * V_a / V_parent)``. On the single-layer tree this
depends on the user's degree alone.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, Literal, Optional

import numpy as np

from selab.core.exceptions import EmptyGraphError, InvalidAdjustingParameterError
from selab.core.logger_manager import get_logger
from selab.entropy.encoding_tree import EncodingTree
from selab.graph.bipartite import BipartiteGraph

logger = get_logger(__name__)

InfluenceMode = Literal["tree", "single_layer"]


def _check_c(c: float) -> None:
    if not c > 0.0:
        raise InvalidAdjustingParameterError(c)


def _adjusted_term(cut: float, volume: float, parent_volume: float, total: float, c: float) -> float:
    if cut <= 0.0:
        return 0.0
    return -(cut / total) * float(np.log2(c * volume / parent_volume))


def influence(g: BipartiteGraph, t: EncodingTree, user_id: str, c: float) -> float:
    """Influence of one user on tree ``t`` (bits)."""
    _check_c(c)
    idx = g.user_index(user_id)
    total = t.total_volume
    if total <= 0.0:
        raise EmptyGraphError()
    score = 0.0
    for node_id in t.path_to_root(t.leaf_of(idx))[:-1]:
        node = t.node(node_id)
        score += _adjusted_term(node.cut, node.volume, t.node(node.parent).volume, total, c)  # type: ignore[arg-type]
    return score


def influence_single_layer(g: BipartiteGraph, user_id: str, c: float) -> float:
    """``-(d_u / V) log2(c * d_u / V)``"""
    _check_c(c)
    total = g.total_volume
    if total <= 0.0:
        raise EmptyGraphError()
    d = g.degree(g.user_ids[g.user_index(user_id)])
    return _adjusted_term(d, d, total, total, c)


@dataclass(frozen=True)
class InfluenceTable:
    """Per-user influence scores computed with adjusting parameter ``c``."""

    scores: Dict[str, float]
    c: float
    mode: InfluenceMode = "tree"

    def __getitem__(self, user_id: str) -> float:
        return self.scores[user_id]

    def __len__(self) -> int:
        return len(self.scores)

    def total(self, users: Iterable[str]) -> float:
        return float(sum(self.scores[u] for u in users))

    def to_dict(self) -> Dict[str, Any]:
        return {"influence": dict(self.scores), "c": self.c, "mode": self.mode}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "InfluenceTable":
        return cls(scores={u: float(s) for u, s in doc["influence"].items()}, c=float(doc["c"]), mode=doc.get("mode", "tree"))


def compute_influence(
    g: BipartiteGraph, t: Optional[EncodingTree], c: float, mode: InfluenceMode = "tree"
) -> InfluenceTable:
    """Influence of every user, accumulated top-down in one pass over the tree."""
    _check_c(c)
    if mode == "single_layer" or t is None:
        total = g.total_volume
        if total <= 0.0:
            raise EmptyGraphError()
        d = g.degrees[: g.num_users]
        scores = np.zeros(g.num_users)
        pos = d > 0.0
        scores[pos] = -(d[pos] / total) * np.log2(c * d[pos] / total)
        table = InfluenceTable({u: float(s) for u, s in zip(g.user_ids, scores.tolist())}, c, "single_layer")
    else:
        total = t.total_volume
        if total <= 0.0:
            raise EmptyGraphError()
        acc: Dict[int, float] = {t.root.id: 0.0}
        stack = [t.root.id]
        while stack:
            parent = t.node(stack.pop())
            for child_id in parent.children:
                child = t.node(child_id)
                acc[child_id] = acc[parent.id] + _adjusted_term(child.cut, child.volume, parent.volume, total, c)
                stack.append(child_id)
        table = InfluenceTable({u: acc[t.leaf_of(i)] for i, u in enumerate(g.user_ids)}, c, "tree")
    logger.debug(f"Influence computed for {len(table)} users (mode={table.mode}, c={c:.4f})")
    return table
