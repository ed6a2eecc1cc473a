"""
Episode-local attack environment over one target's associated subgraph.

The environment owns a private copy of the graph; each step adds exactly one
new (malicious account, post) edge and re-queries the black-box detector.
"""

from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from selab.detector.interface import BlackBoxDetector
from selab.graph.bipartite import BipartiteGraph, Subgraph, with_added_edges
from selab.influence.categorize import AGENTS, AccountGroups

from .sampling import CollectiveAction
from .state import STRATEGIES, AttackState

PARTIAL_REWARD_CAP = 0.99


def misclassified(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Predicted label (threshold 0.5) differs from the true label."""
    return (probs >= 0.5).astype(np.int64) != labels


def reward(model: BlackBoxDetector, g: BipartiteGraph, sub: Subgraph) -> float:
    """1 when the target is misclassified, else the share of the other peers that are.

    The partial branch is capped below 1 so that a full reward always means
    the target itself flipped. A target without peers earns 0 unless flipped.
    """
    value, _ = _reward_and_prob(model, g, sub)
    return value


def _reward_and_prob(model: BlackBoxDetector, g: BipartiteGraph, sub: Subgraph) -> Tuple[float, float]:
    peers = list(sub.peers)
    probs = model.predict_proba(g, peers)
    labels = np.full(len(peers), sub.target_label)
    wrong = misclassified(probs, labels)
    if wrong[0]:
        return 1.0, float(probs[0])
    if len(peers) == 1:
        return 0.0, float(probs[0])
    return min(float(wrong[1:].mean()), PARTIAL_REWARD_CAP), float(probs[0])


class AttackEnvironment:
    """Deterministic edge-addition MDP for one target."""

    def __init__(
        self,
        g: BipartiteGraph,
        sub: Subgraph,
        model: BlackBoxDetector,
        groups: AccountGroups,
        enabled_actions: np.ndarray,
        agent_budgets: Optional[Mapping[str, int]] = None,
    ):
        self.base = g
        self.sub = sub
        self.model = model
        self.groups = groups
        self.enabled_actions = enabled_actions
        self.agent_budgets = dict(agent_budgets or {a: len(groups.accounts(a)) for a in AGENTS})
        self._action_posts = np.array([g.post_index(p) for p in sub.action_posts], dtype=np.int64)
        self.clean_prob = float(model.predict_proba(g, [sub.target])[0])
        self.reset()

    def reset(self) -> AttackState:
        self.graph = self.base
        self.added: List[Tuple[str, str]] = []
        self._engaged: Dict[str, set] = {}
        self.used = {a: 0 for a in AGENTS}
        self.counts = {s: 0 for s in STRATEGIES}
        self.target_prob = self.clean_prob
        self.success = bool(misclassified(np.array([self.clean_prob]), np.array([self.sub.target_label]))[0])
        return self.state

    @property
    def state(self) -> AttackState:
        fractions = tuple(
            (self.used[a] / self.agent_budgets[a]) if self.agent_budgets[a] > 0 else 1.0 for a in AGENTS
        )
        return AttackState(
            target_fake_prob=self.target_prob,
            budget_used=fractions,  # type: ignore[arg-type]
            strategy_counts=tuple(self.counts[s] for s in STRATEGIES),  # type: ignore[arg-type]
        )

    def budget_left(self, agent: str) -> bool:
        return self.used[agent] < self.agent_budgets[agent]

    def _engaged_of(self, account: str) -> set:
        engaged = self._engaged.get(account)
        if engaged is None:
            engaged = set(self.base.user_posts[self.base.user_index(account)])
            self._engaged[account] = engaged
        return engaged

    def feasible(self, account: str) -> np.ndarray:
        """Enabled action posts the account does not engage with yet."""
        engaged = self._engaged_of(account)
        fresh = np.array([p not in engaged for p in self._action_posts.tolist()], dtype=bool)
        return fresh & self.enabled_actions

    def feasible_for(self, agent: str, accounts: Sequence[str]) -> Dict[str, np.ndarray]:
        if not self.budget_left(agent):
            return {}
        return {u: self.feasible(u) for u in accounts}

    def step(self, action: CollectiveAction) -> Tuple[float, AttackState]:
        self.graph = with_added_edges(self.graph, [(action.user, action.post)])
        self.added.append((action.user, action.post))
        self._engaged_of(action.user).add(self.base.post_index(action.post))
        self.used[action.agent] += 1
        self.counts[action.strategy] += 1
        value, self.target_prob = _reward_and_prob(self.model, self.graph, self.sub)
        self.success = value == 1.0
        return value, self.state

