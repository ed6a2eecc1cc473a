"""
Entropy-weighted account sampling and influence-weighted action aggregation.
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from selab.entropy.encoding_tree import EncodingTree
from selab.entropy.measures import node_entropy
from selab.graph.bipartite import BipartiteGraph, Subgraph
from selab.influence.categorize import AGENTS, AccountGroups

from .state import Strategy

ROOT_FALLBACK = 0.01


@dataclass(frozen=True)
class CollectiveAction:
    """The single (account, post) edge an attack step adds."""

    user: str
    post: str
    strategy: Strategy
    agent: str
    action_index: int


def sample_prob(
    g: BipartiteGraph, t: EncodingTree, user_id: str, post_id: str, fallback: float = ROOT_FALLBACK
) -> float:
    """Summed entropy of the non-root communities holding both vertices, or ``fallback``."""
    u_path = set(t.ancestors(t.leaf_of(g.vertex_index(user_id))))
    p_path = set(t.ancestors(t.leaf_of(g.vertex_index(post_id))))
    shared = (u_path & p_path) - {t.root.id}
    weight = sum(node_entropy(g, t, node_id) for node_id in shared)
    return weight if weight > 0.0 else fallback


def account_weights(
    g: BipartiteGraph, t: EncodingTree, accounts: Sequence[str], target: str, fallback: float = ROOT_FALLBACK
) -> Dict[str, float]:
    return {u: sample_prob(g, t, u, target, fallback) for u in accounts}


def sample_agent_action(
    proposals: Mapping[str, Optional[int]], weights: Mapping[str, float], rng: np.random.Generator
) -> Tuple[str, int]:
    """Draw one active account with probability proportional to its weight."""
    active = [(u, choice) for u, choice in proposals.items() if choice is not None]
    if len(active) == 1:
        return active[0][0], int(active[0][1])
    w = np.array([weights[u] for u, _ in active], dtype=float)
    pick = int(rng.choice(len(active), p=w / w.sum()))
    return active[pick][0], int(active[pick][1])


def _pick_agent(agents: Sequence[str], groups: AccountGroups, rng: np.random.Generator, argmax: bool) -> str:
    totals = np.array([max(groups.influence_sum(a), 0.0) for a in agents], dtype=float)
    if argmax:
        return agents[int(np.argmax(totals))]
    if totals.sum() <= 0.0:
        return agents[int(rng.integers(len(agents)))]
    return agents[int(rng.choice(len(agents), p=totals / totals.sum()))]


def aggregate(
    candidates: Mapping[str, Tuple[str, int]],
    groups: AccountGroups,
    sub: Subgraph,
    rng: np.random.Generator,
    argmax: bool = False,
) -> CollectiveAction:
    """Execute one agent's action, chosen proportionally to its accounts' total influence.

    Falls back to a uniform choice when every active agent has zero influence.
    """
    agents = [a for a in AGENTS if a in candidates]
    agent = _pick_agent(agents, groups, rng, argmax)
    user, index = candidates[agent]
    return CollectiveAction(
        user=user,
        post=sub.action_posts[index],
        strategy=strategy_of(sub, index),
        agent=agent,
        action_index=index,
    )


def strategy_of(sub: Subgraph, action_index: int) -> Strategy:
    """Direct for the target, Feedback for other same-label posts, Indirect for opposite-label posts."""
    if action_index == 0:
        return Strategy.DIRECT
    if action_index < len(sub.peers):
        return Strategy.FEEDBACK
    return Strategy.INDIRECT


def strategy_mask(sub: Subgraph, enabled: Mapping[Strategy, bool]) -> np.ndarray:
    """Action indices whose strategy is enabled."""
    return np.array([enabled[strategy_of(sub, i)] for i in range(len(sub.action_posts))], dtype=bool)
