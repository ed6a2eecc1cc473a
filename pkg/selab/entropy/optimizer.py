"""
Greedy encoding-tree optimization with stretch, merge and compress operators.

Schedule:
    1. stretch the root ``K - 1`` times; each pass groups the root's children
       into one new level of communities by greedy pair merging;
    2. repeatedly merge the sibling pair (at any level) with the largest
       entropy reduction, then compress single-child and zero-gain nodes;
    3. stop when nothing improves by more than ``tolerance`` or after
       ``50 * |V|`` operator applications.

All deltas are closed-form in the cached volumes and cuts, so no operator
ever recomputes the tree entropy from scratch.
"""

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from selab.core.exceptions import EmptyGraphError, EntropyError
from selab.core.logger_manager import get_logger, log_execution_time
from selab.graph.bipartite import BipartiteGraph

from .encoding_tree import ROOT, EncodingTree, TreeNode
from .measures import one_dim_entropy, tree_entropy

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-9
ITERATIONS_PER_VERTEX = 50


@dataclass
class _OperatorBudget:
    limit: int
    used: int = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def spend(self) -> None:
        self.used += 1


@dataclass
class _Group:
    """A candidate community formed from children of the node being stretched."""

    members: List[int]
    key: int
    volume: float
    cut: float
    s0: float
    s1: float
    neighbours: Dict[int, float] = field(default_factory=dict)


def _log2(x: float) -> float:
    return math.log2(x) if x > 0.0 else 0.0


def _term(cut: float, volume: float, parent_volume: float, total: float) -> float:
    if cut <= 0.0:
        return 0.0
    return -(cut / total) * math.log2(volume / parent_volume)


def _group_contribution(grp: _Group, parent_volume: float, total: float) -> float:
    """Entropy of a group under the stretched node.

    A group of one member is the bare member; a larger group is a new node
    plus its members re-parented under it. Both reduce to the same formula.
    """
    return ((grp.s0 - grp.cut) * _log2(grp.volume) + grp.cut * _log2(parent_volume) - grp.s1) / total


def _merged(a: _Group, b: _Group, weight: float) -> _Group:
    return _Group(
        members=a.members + b.members,
        key=min(a.key, b.key),
        volume=a.volume + b.volume,
        cut=max(a.cut + b.cut - 2.0 * weight, 0.0),
        s0=a.s0 + b.s0,
        s1=a.s1 + b.s1,
    )


def _sibling_weights(g: BipartiteGraph, t: EncodingTree, node_ids: Sequence[int]) -> Dict[Tuple[int, int], float]:
    """Total edge weight between each adjacent pair of the given disjoint nodes, keyed by list position."""
    n = len(node_ids)
    owner = np.full(g.num_vertices, -1, dtype=np.int64)
    for pos, node_id in enumerate(node_ids):
        owner[list(t.node(node_id).vertices)] = pos
    a = owner[g.edge_users]
    b = owner[g.num_users + g.edge_posts]
    keep = (a >= 0) & (b >= 0) & (a != b) & (g.weights > 0.0)
    if not keep.any():
        return {}
    lo = np.minimum(a[keep], b[keep])
    hi = np.maximum(a[keep], b[keep])
    codes, inverse = np.unique(lo * n + hi, return_inverse=True)
    sums = np.bincount(inverse, weights=g.weights[keep])
    return {(int(c // n), int(c % n)): float(w) for c, w in zip(codes.tolist(), sums.tolist())}


def _stretch(
    g: BipartiteGraph,
    t: EncodingTree,
    parent_id: int,
    tolerance: float,
    budget: _OperatorBudget,
) -> int:
    """Group the children of ``parent_id`` into one new level of communities.

    Returns the number of communities inserted.
    """
    parent = t.node(parent_id)
    total = t.total_volume
    children = sorted(parent.children, key=lambda c: t.node(c).key)
    groups: Dict[int, _Group] = {}
    for gid, child_id in enumerate(children):
        child = t.node(child_id)
        groups[gid] = _Group(
            members=[child_id],
            key=child.key,
            volume=child.volume,
            cut=child.cut,
            s0=child.cut,
            s1=child.cut * _log2(child.volume),
        )
    for (i, j), w in _sibling_weights(g, t, children).items():
        groups[i].neighbours[j] = w
        groups[j].neighbours[i] = w

    heap: List[Tuple[float, int, int, int, int]] = []

    def push(i: int, j: int) -> None:
        a, b = groups[i], groups[j]
        candidate = _merged(a, b, a.neighbours[j])
        delta = (
            _group_contribution(candidate, parent.volume, total)
            - _group_contribution(a, parent.volume, total)
            - _group_contribution(b, parent.volume, total)
        )
        if delta < -tolerance:
            heapq.heappush(heap, (delta, min(a.key, b.key), max(a.key, b.key), i, j))

    for i in list(groups):
        for j in groups[i].neighbours:
            if i < j:
                push(i, j)

    next_id = len(groups)
    while heap and not budget.exhausted:
        _, _, _, i, j = heapq.heappop(heap)
        if i not in groups or j not in groups:
            continue
        a, b = groups.pop(i), groups.pop(j)
        merged = _merged(a, b, a.neighbours[j])
        for source in (a, b):
            for nbr, w in source.neighbours.items():
                if nbr in (i, j):
                    continue
                merged.neighbours[nbr] = merged.neighbours.get(nbr, 0.0) + w
        gid = next_id
        next_id += 1
        groups[gid] = merged
        for nbr, w in merged.neighbours.items():
            other = groups[nbr].neighbours
            other.pop(i, None)
            other.pop(j, None)
            other[gid] = w
        for nbr in merged.neighbours:
            push(gid, nbr)
        budget.spend()

    inserted = 0
    for grp in sorted(groups.values(), key=lambda x: x.key):
        if len(grp.members) < 2 or len(grp.members) == len(children):
            continue
        node_id = t.add_node(parent_id, grp.members)
        t.set_cached(node_id, grp.volume, grp.cut)
        inserted += 1
    return inserted


def _merge_delta(t: EncodingTree, a: TreeNode, b: TreeNode, cut: float, parent_volume: float, total: float) -> float:
    volume = a.volume + b.volume
    delta = _term(cut, volume, parent_volume, total)
    delta -= _term(a.cut, a.volume, parent_volume, total) + _term(b.cut, b.volume, parent_volume, total)
    for node in (a, b):
        child_cut = sum(t.node(c).cut for c in node.children)
        delta += (child_cut / total) * math.log2(volume / node.volume)
    return delta


def _best_merge(
    g: BipartiteGraph, t: EncodingTree, tolerance: float
) -> Optional[Tuple[float, int, int, int, int, float]]:
    total = t.total_volume
    best = None
    for parent in list(t.live_nodes()):
        internal = [c for c in parent.children if not t.node(c).is_leaf]
        if len(internal) < 2:
            continue
        for (i, j), w in _sibling_weights(g, t, internal).items():
            a, b = t.node(internal[i]), t.node(internal[j])
            cut = max(a.cut + b.cut - 2.0 * w, 0.0)
            delta = _merge_delta(t, a, b, cut, parent.volume, total)
            if delta >= -tolerance:
                continue
            if a.key > b.key:
                a, b = b, a
            candidate = (delta, a.key, b.key, a.id, b.id, cut)
            if best is None or candidate < best:
                best = candidate
    return best


def compress_delta(t: EncodingTree, node: TreeNode) -> float:
    """Entropy change of removing ``node`` and promoting its children (always >= 0)."""
    parent = t.node(node.parent)  # type: ignore[arg-type]
    if node.volume <= 0.0:
        return 0.0
    child_cut = sum(t.node(c).cut for c in node.children)
    return ((node.cut - child_cut) / t.total_volume) * math.log2(node.volume / parent.volume)


def _compress_pass(t: EncodingTree, tolerance: float, budget: _OperatorBudget) -> int:
    removed = 0
    for node in sorted(t.non_root_nodes(), key=lambda n: n.key):
        if budget.exhausted:
            break
        if node.is_leaf or t.nodes[node.id] is None:
            continue
        if len(node.children) == 1 or compress_delta(t, node) <= tolerance:
            t.remove_node(node.id)
            removed += 1
            budget.spend()
    return removed


@log_execution_time()
def optimize_tree(
    g: BipartiteGraph,
    K: int,
    tolerance: float = DEFAULT_TOLERANCE,
    validate_steps: bool = False,
) -> EncodingTree:
    """Greedily build an encoding tree of height at most ``K``.

    The result never has more entropy than the single-layer tree. The
    procedure is deterministic: there is no randomness, ties go to the
    lexicographically smallest vertex sets.
    """
    if K < 2:
        raise EntropyError(f"tree height must be >= 2, got {K}", {"K": K})
    if g.total_volume <= 0.0:
        raise EmptyGraphError()

    t = EncodingTree.single_layer(g)
    t.height = K
    budget = _OperatorBudget(limit=ITERATIONS_PER_VERTEX * g.num_vertices)

    def checkpoint() -> None:
        if validate_steps:
            t.validate(g)

    for _ in range(K - 1):
        inserted = _stretch(g, t, ROOT, tolerance, budget)
        checkpoint()
        logger.debug(f"Stretch inserted {inserted} communities under the root")
        if inserted == 0:
            break

    while not budget.exhausted:
        changed = False
        best = _best_merge(g, t, tolerance)
        while best is not None and not budget.exhausted:
            _, _, _, keep, absorb, cut = best
            t.merge_nodes(keep, absorb, cut)
            budget.spend()
            checkpoint()
            changed = True
            best = _best_merge(g, t, tolerance)
        if _compress_pass(t, tolerance, budget):
            checkpoint()
            changed = True
        if not changed:
            break

    if budget.exhausted:
        logger.warning(f"Tree optimization stopped at the iteration bound ({budget.limit})")

    t.compact()
    checkpoint()
    logger.info(
        f"Encoding tree: {len(t)} nodes, depth {t.max_depth}, "
        f"entropy {tree_entropy(g, t):.6f} bits (single layer {one_dim_entropy(g):.6f})",
        extra={"operators": budget.used},
    )
    return t
