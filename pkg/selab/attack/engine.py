"""
Multi-agent Q-learning attack loop.

For every target the engine extracts the associated subgraph, trains one
tabular policy per agent over ``episodes`` episodes of ``t_max`` steps, and
then rolls the greedy policies out once to decide whether the target can be
misclassified. Each step:

    1. every active agent proposes a post per controlled account;
    2. one account per agent is drawn, weighted by shared-community entropy
       with the target;
    3. one agent's action is executed, weighted by its accounts' influence;
    4. the executing agent updates its Q table online.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from selab.core.config_service import AgentToggles, AttackHyperparams, StrategyToggles
from selab.core.exceptions import AgentExhaustedError, UnknownTargetError
from selab.core.logger_manager import get_logger, log_execution_time
from selab.core.seeding import phase_rng
from selab.detector.interface import BlackBoxDetector
from selab.entropy.encoding_tree import EncodingTree
from selab.entropy.subgraph import extract_subgraph
from selab.graph.bipartite import BipartiteGraph, Subgraph
from selab.influence.categorize import AGENTS, AccountGroups

from .environment import AttackEnvironment
from .policy import AgentPolicy, Transition, epsilon_schedule
from .sampling import CollectiveAction, account_weights, aggregate, sample_agent_action, strategy_mask
from .state import STRATEGIES, StateCode, Strategy

logger = get_logger(__name__)

MAIN_ATTACK = "structural"


@dataclass(frozen=True)
class StepRecord:
    """One transition: state, collective action, reward, next state.

    Baselines have no MDP state and leave both state fields unset.
    """

    agent: str
    user: str
    post: str
    strategy: str
    reward: float
    state: Optional[StateCode] = None
    next_state: Optional[StateCode] = None

    def to_list(self) -> List[Any]:
        return [
            list(self.state) if self.state is not None else None,
            self.agent,
            self.user,
            self.post,
            self.strategy,
            self.reward,
            list(self.next_state) if self.next_state is not None else None,
        ]


@dataclass
class EpisodeLog:
    """One training episode (or a baseline rollout) against one target."""

    target: str
    episode: int
    steps: List[StepRecord] = field(default_factory=list)
    first_success: Optional[int] = None

    @property
    def rewards(self) -> List[float]:
        return [s.reward for s in self.steps]

    @property
    def added_edges(self) -> List[Tuple[str, str]]:
        return [(s.user, s.post) for s in self.steps]

    def record(
        self,
        action: CollectiveAction,
        reward: float,
        state: Optional[StateCode] = None,
        next_state: Optional[StateCode] = None,
    ) -> None:
        self.steps.append(
            StepRecord(action.agent, action.user, action.post, str(action.strategy), reward, state, next_state)
        )
        if reward == 1.0 and self.first_success is None:
            self.first_success = len(self.steps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "episode": self.episode,
            "steps": [s.to_list() for s in self.steps],
            "first_success": self.first_success,
            "total_reward": float(sum(self.rewards)),
        }


@dataclass
class TargetOutcome:
    """Final-policy rollout result for one target."""

    target: str
    success: bool
    prob_before: float
    prob_after: float
    first_success: Optional[int]
    added_edges: List[Tuple[str, str]]
    strategy_counts: Dict[str, int]
    degree: int
    community_size: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "success": self.success,
            "prob_before": self.prob_before,
            "prob_after": self.prob_after,
            "first_success": self.first_success,
            "added_edges": [list(e) for e in self.added_edges],
            "strategy_counts": self.strategy_counts,
            "degree": self.degree,
            "community_size": self.community_size,
        }


@dataclass
class AttackResult:
    attack: str
    outcomes: List[TargetOutcome] = field(default_factory=list)
    logs: List[EpisodeLog] = field(default_factory=list)
    policies: Dict[str, Dict[str, AgentPolicy]] = field(default_factory=dict, repr=False)

    @property
    def success_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return float(np.mean([o.success for o in self.outcomes]))

    @property
    def mean_prob_before(self) -> float:
        return float(np.mean([o.prob_before for o in self.outcomes])) if self.outcomes else 0.0

    @property
    def mean_prob_after(self) -> float:
        return float(np.mean([o.prob_after for o in self.outcomes])) if self.outcomes else 0.0

    def strategy_shares(self) -> Dict[str, float]:
        totals = {str(s): 0 for s in STRATEGIES}
        for outcome in self.outcomes:
            for name, count in outcome.strategy_counts.items():
                totals[name] += count
        n = sum(totals.values())
        return {name: (count / n if n else 0.0) for name, count in totals.items()}

    def manipulated_edges(self) -> List[Tuple[str, str]]:
        """Union of the rollout edges over all targets, first occurrence order."""
        return list(dict.fromkeys(e for o in self.outcomes for e in o.added_edges))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attack": self.attack,
            "success_rate": self.success_rate,
            "targets": [o.to_dict() for o in self.outcomes],
            "episodes": [log.to_dict() for log in self.logs],
        }


def check_targets(g: BipartiteGraph, targets: Iterable[str]) -> List[str]:
    posts = set(g.post_ids)
    checked = []
    for target in targets:
        if target not in posts:
            raise UnknownTargetError(target)
        checked.append(target)
    return checked


def _select_action(
    env: AttackEnvironment,
    policies: Dict[str, AgentPolicy],
    weights: Dict[str, float],
    rng: np.random.Generator,
    argmax: bool,
) -> Optional[CollectiveAction]:
    code = env.state.code
    candidates: Dict[str, Tuple[str, int]] = {}
    for agent, policy in policies.items():
        try:
            proposals = policy.propose(code, env.feasible_for(agent, policy.accounts), rng)
        except AgentExhaustedError:
            continue
        candidates[agent] = sample_agent_action(proposals, weights, rng)
    if not candidates:
        return None
    return aggregate(candidates, env.groups, env.sub, rng, argmax)


def _enabled_strategies(toggles: StrategyToggles) -> Dict[Strategy, bool]:
    return {Strategy.DIRECT: toggles.direct, Strategy.INDIRECT: toggles.indirect, Strategy.FEEDBACK: toggles.feedback}


def _build_policies(
    groups: AccountGroups, agents: AgentToggles, sub: Subgraph, hyperparams: AttackHyperparams
) -> Dict[str, AgentPolicy]:
    enabled = {"bot": agents.bot, "cyborg": agents.cyborg, "worker": agents.worker}
    return {
        agent: AgentPolicy(
            kind=agent,
            accounts=groups.accounts(agent),
            n_actions=len(sub.action_posts),
            gamma=hyperparams.gamma,
            learning_rate=hyperparams.learning_rate,
            epsilon=hyperparams.epsilon_start,
        )
        for agent in AGENTS
        if enabled[agent] and groups.accounts(agent)
    }


def _attack_target(
    g: BipartiteGraph,
    t: EncodingTree,
    groups: AccountGroups,
    model: BlackBoxDetector,
    target: str,
    t_max: int,
    hyperparams: AttackHyperparams,
    strategies: StrategyToggles,
    agents: AgentToggles,
    k: Optional[int],
    seed: int,
) -> Tuple[TargetOutcome, List[EpisodeLog], Dict[str, AgentPolicy]]:
    rng = phase_rng(seed, "attack", target)
    sub = extract_subgraph(g, t, target, k)
    env = AttackEnvironment(g, sub, model, groups, strategy_mask(sub, _enabled_strategies(strategies)))
    policies = _build_policies(groups, agents, sub, hyperparams)
    weights = account_weights(g, t, groups.malicious, target, hyperparams.root_fallback)

    logs: List[EpisodeLog] = []
    global_step = 0
    for episode in range(hyperparams.episodes):
        epsilon = epsilon_schedule(
            episode,
            hyperparams.episodes,
            hyperparams.epsilon_start,
            hyperparams.epsilon_end,
            hyperparams.epsilon_decay_fraction,
        )
        for policy in policies.values():
            policy.epsilon = epsilon
        env.reset()
        log = EpisodeLog(target=target, episode=episode)
        for step in range(t_max):
            code = env.state.code
            action = _select_action(env, policies, weights, rng, hyperparams.argmax_aggregation)
            if action is None:
                logger.warning(f"No active agent left for target {target} at step {step}")
                break
            value, next_state = env.step(action)
            policies[action.agent].q_update(
                Transition(code, action.action_index, value, next_state.code, terminal=step == t_max - 1)
            )
            global_step += 1
            if global_step % hyperparams.t_up == 0:
                for policy in policies.values():
                    policy.sync_target()
            log.record(action, value, code, next_state.code)
        logs.append(log)

    for policy in policies.values():
        policy.epsilon = 0.0
    env.reset()
    rollout = EpisodeLog(target=target, episode=-1)
    for _ in range(t_max):
        if env.success and hyperparams.early_stop_eval:
            break
        code = env.state.code
        action = _select_action(env, policies, weights, rng, hyperparams.argmax_aggregation)
        if action is None:
            break
        value, next_state = env.step(action)
        rollout.record(action, value, code, next_state.code)

    outcome = TargetOutcome(
        target=target,
        success=env.success,
        prob_before=env.clean_prob,
        prob_after=env.target_prob,
        first_success=0 if env.success and not rollout.steps else rollout.first_success,
        added_edges=list(env.added),
        strategy_counts={str(s): env.counts[s] for s in STRATEGIES},
        degree=g.post_degree(target),
        community_size=len(sub.posts),
    )
    return outcome, logs, policies


@log_execution_time()
def run_attack(
    g: BipartiteGraph,
    t: EncodingTree,
    groups: AccountGroups,
    model: BlackBoxDetector,
    targets: Sequence[str],
    t_max: int,
    t_up: int,
    episodes: int,
    seed: int,
    hyperparams: Optional[AttackHyperparams] = None,
    strategies: Optional[StrategyToggles] = None,
    agents: Optional[AgentToggles] = None,
    k: Optional[int] = None,
    progress: bool = False,
) -> AttackResult:
    """Train per-target multi-agent policies and report the greedy rollout success rate."""
    params = (hyperparams or AttackHyperparams()).model_copy(update={"t_up": t_up, "episodes": episodes})
    strategies = strategies or StrategyToggles()
    agents = agents or AgentToggles()
    result = AttackResult(attack=MAIN_ATTACK)
    for target in tqdm(check_targets(g, targets), desc="attack", disable=not progress):
        outcome, logs, policies = _attack_target(
            g, t, groups, model, target, t_max, params, strategies, agents, k, seed
        )
        result.outcomes.append(outcome)
        result.logs.extend(logs)
        result.policies[target] = policies
    logger.info(
        f"Attack finished on {len(result.outcomes)} targets: success rate {result.success_rate:.3f}",
        extra={"attack": result.attack, "t_max": t_max, "episodes": episodes},
    )
    return result


def collect_manipulations(
    g: BipartiteGraph,
    t: EncodingTree,
    groups: AccountGroups,
    model: BlackBoxDetector,
    targets: Sequence[str],
    t_max: int,
    seed: int,
    hyperparams: Optional[AttackHyperparams] = None,
    strategies: Optional[StrategyToggles] = None,
    agents: Optional[AgentToggles] = None,
    k: Optional[int] = None,
) -> List[Tuple[str, str]]:
    """Edges the trained attack adds against ``targets``, used to refine the detector."""
    params = hyperparams or AttackHyperparams()
    result = run_attack(
        g, t, groups, model, targets, t_max, params.t_up, params.episodes, seed, params, strategies, agents, k
    )
    edges = result.manipulated_edges()
    logger.info(f"Collected {len(edges)} manipulated edges from {len(targets)} targets")
    return edges
