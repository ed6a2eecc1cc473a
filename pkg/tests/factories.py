"""
Small graph builders shared by the test modules.
"""

from typing import Callable, Dict, Optional, Sequence

import numpy as np

from selab.core.config_service import Budgets, DetectorHyperparams, SyntheticSpec
from selab.detector.interface import BlackBoxDetector
from selab.graph.bipartite import BipartiteGraph, build_graph

TINY_SPEC = SyntheticSpec(communities=2, users_per_community=30, posts_per_community=10, feature_dim=6)
TINY_BUDGETS = Budgets(bots=4, cyborgs=2, workers=1)
TINY_DETECTOR = DetectorHyperparams(hidden=8, epochs=150, refine_epochs=20)


def make_graph(
    users: Sequence[str],
    posts: Sequence[str],
    edges,
    labels: Optional[Dict[str, int]] = None,
    dim: int = 2,
) -> BipartiteGraph:
    """Graph with all-ones features; edges carry explicit weights."""
    ones = {v: np.ones(dim) for v in list(users) + list(posts)}
    return build_graph(users, posts, edges, ones, ones, labels or {p: 0 for p in posts})


def random_graph(rng: np.random.Generator, max_side: int = 4, p: float = 0.6) -> BipartiteGraph:
    """Small random weighted bipartite graph in which every vertex has an edge."""
    m = int(rng.integers(1, max_side + 1))
    n = int(rng.integers(1, max_side + 1))
    users = [f"u{i}" for i in range(m)]
    posts = [f"p{j}" for j in range(n)]
    pairs = {(i, j) for i in range(m) for j in range(n) if rng.random() < p}
    for i in range(m):
        if not any(a == i for a, _ in pairs):
            pairs.add((i, int(rng.integers(n))))
    for j in range(n):
        if not any(b == j for _, b in pairs):
            pairs.add((int(rng.integers(m)), j))
    edges = [(users[i], posts[j], float(rng.uniform(0.1, 1.0))) for i, j in sorted(pairs)]
    return make_graph(users, posts, edges)


def bridged_cycles(
    names: Sequence[str], labels: Optional[Dict[str, int]] = None, bridge: float = 0.01
) -> BipartiteGraph:
    """Unit-weight 4-cycles ``{x0, x1} x {px0, px1}`` per name, chained by weak ``x0 - p<next>0`` bridges."""
    users = [f"{c}{i}" for c in names for i in (0, 1)]
    posts = [f"p{c}{i}" for c in names for i in (0, 1)]
    edges = [(f"{c}{i}", f"p{c}{j}", 1.0) for c in names for i in (0, 1) for j in (0, 1)]
    edges += [(f"{a}0", f"p{b}0", bridge) for a, b in zip(names, names[1:])]
    return make_graph(users, posts, edges, labels)


def cycle_blocks(names: Sequence[str]) -> set:
    return {frozenset({f"{c}0", f"{c}1", f"p{c}0", f"p{c}1"}) for c in names}


class ScriptedDetector(BlackBoxDetector):
    """Black box whose fake probability per post is a function of the graph"""

    def __init__(self, score: Callable[[BipartiteGraph, str], float]):
        self.score = score
        self.calls = 0

    def predict_proba(self, g, posts=None):
        self.calls += 1
        posts = list(g.post_ids) if posts is None else list(posts)
        return np.array([self.score(g, p) for p in posts], dtype=float)
