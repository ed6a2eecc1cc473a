"""
Random and DICE structure-attack baselines.

Both add one new malicious edge per step anywhere in the graph, under the
same per-agent budgets and step limit as the learned attack.
"""

from selab._compat import StrEnum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from selab.core.config_service import AgentToggles
from selab.core.logger_manager import get_logger, log_execution_time
from selab.core.seeding import phase_rng
from selab.detector.interface import BlackBoxDetector
from selab.graph.bipartite import BipartiteGraph, with_added_edges
from selab.influence.categorize import AGENTS, AccountGroups

from .engine import AttackResult, EpisodeLog, StepRecord, TargetOutcome, check_targets
from .environment import misclassified
from .state import STRATEGIES, Strategy

logger = get_logger(__name__)

DICE_PREFERENCE = 0.8


class BaselineKind(StrEnum):
    RANDOM = "random"
    DICE = "dice"


class _Rollout:
    """Episode-local edge bookkeeping shared by both baselines."""

    def __init__(self, g: BipartiteGraph, groups: AccountGroups, agents: AgentToggles):
        self.g = g
        enabled = {"bot": agents.bot, "cyborg": agents.cyborg, "worker": agents.worker}
        self.owner = {u: a for a in AGENTS if enabled[a] for u in groups.accounts(a)}
        self.budget = {a: len(groups.accounts(a)) for a in AGENTS}
        self.used = {a: 0 for a in AGENTS}
        self.engaged: Dict[str, Set[int]] = {u: set(g.user_posts[g.user_index(u)]) for u in self.owner}

    def eligible(self) -> List[str]:
        return [
            u
            for u, agent in self.owner.items()
            if self.used[agent] < self.budget[agent] and len(self.engaged[u]) < self.g.num_posts
        ]

    def free_posts(self, account: str) -> np.ndarray:
        mask = np.ones(self.g.num_posts, dtype=bool)
        mask[list(self.engaged[account])] = False
        return np.flatnonzero(mask)

    def majority_label(self, account: str) -> Optional[int]:
        labels = [int(self.g.labels[p]) for p in self.engaged[account]]
        fake = sum(labels)
        real = len(labels) - fake
        if fake == real:
            return None
        return 1 if fake > real else 0

    def add(self, account: str, post: int) -> None:
        self.engaged[account].add(post)
        self.used[self.owner[account]] += 1


def _random_choice(rollout: _Rollout, rng: np.random.Generator) -> Optional[Tuple[str, int]]:
    pairs = [(u, int(p)) for u in rollout.eligible() for p in rollout.free_posts(u)]
    if not pairs:
        return None
    return pairs[int(rng.integers(len(pairs)))]


def _dice_choice(rollout: _Rollout, rng: np.random.Generator, preference: float) -> Optional[Tuple[str, int]]:
    accounts = rollout.eligible()
    if not accounts:
        return None
    account = accounts[int(rng.integers(len(accounts)))]
    free = rollout.free_posts(account)
    majority = rollout.majority_label(account)
    if majority is not None and rng.random() < preference:
        different = free[rollout.g.labels[free] != majority]
        if different.size:
            free = different
    return account, int(free[int(rng.integers(free.size))])


def _tag(g: BipartiteGraph, target: str, post: str) -> Strategy:
    if post == target:
        return Strategy.DIRECT
    if g.label_of(post) == g.label_of(target):
        return Strategy.FEEDBACK
    return Strategy.INDIRECT


@log_execution_time()
def baseline_attack(
    kind: str,
    g: BipartiteGraph,
    groups: AccountGroups,
    model: BlackBoxDetector,
    targets: Sequence[str],
    t_max: int,
    seed: int,
    agents: Optional[AgentToggles] = None,
    early_stop: bool = True,
    preference: float = DICE_PREFERENCE,
) -> AttackResult:
    """Run the Random or DICE baseline once per target."""
    kind = BaselineKind(kind)
    agents = agents or AgentToggles()
    result = AttackResult(attack=str(kind))
    for target in check_targets(g, targets):
        rng = phase_rng(seed, str(kind), target)
        label = np.array([g.label_of(target)])
        rollout = _Rollout(g, groups, agents)
        graph = g
        prob_before = float(model.predict_proba(g, [target])[0])
        prob = prob_before
        success = bool(misclassified(np.array([prob]), label)[0])
        log = EpisodeLog(target=target, episode=0)
        counts = {str(s): 0 for s in STRATEGIES}
        for _ in range(t_max):
            if success and early_stop:
                break
            if kind == BaselineKind.RANDOM:
                choice = _random_choice(rollout, rng)
            else:
                choice = _dice_choice(rollout, rng, preference)
            if choice is None:
                break
            account, post_idx = choice
            post = g.post_ids[post_idx]
            rollout.add(account, post_idx)
            graph = with_added_edges(graph, [(account, post)])
            prob = float(model.predict_proba(graph, [target])[0])
            success = bool(misclassified(np.array([prob]), label)[0])
            strategy = _tag(g, target, post)
            counts[str(strategy)] += 1
            log.steps.append(StepRecord(rollout.owner[account], account, post, str(strategy), 1.0 if success else 0.0))
            if success and log.first_success is None:
                log.first_success = len(log.steps)
        result.logs.append(log)
        result.outcomes.append(
            TargetOutcome(
                target=target,
                success=success,
                prob_before=prob_before,
                prob_after=prob,
                first_success=0 if success and not log.steps else log.first_success,
                added_edges=log.added_edges,
                strategy_counts=counts,
                degree=g.post_degree(target),
            )
        )
    logger.info(f"{kind} baseline on {len(result.outcomes)} targets: success rate {result.success_rate:.3f}")
    return result
