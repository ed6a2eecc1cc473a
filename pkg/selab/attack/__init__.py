"""
Multi-agent structure attack against a black-box detector, plus baselines.
"""

from .baselines import BaselineKind, baseline_attack
from .engine import AttackResult, EpisodeLog, StepRecord, TargetOutcome, collect_manipulations, run_attack
from .environment import AttackEnvironment, misclassified, reward
from .policy import AgentPolicy, Transition, epsilon_schedule, q_update
from .sampling import (
    CollectiveAction,
    account_weights,
    aggregate,
    sample_agent_action,
    sample_prob,
    strategy_mask,
    strategy_of,
)
from .state import AttackState, Strategy, discretize

__all__ = [
    "BaselineKind",
    "baseline_attack",
    "AttackResult",
    "EpisodeLog",
    "StepRecord",
    "TargetOutcome",
    "collect_manipulations",
    "run_attack",
    "AttackEnvironment",
    "misclassified",
    "reward",
    "AgentPolicy",
    "Transition",
    "epsilon_schedule",
    "q_update",
    "CollectiveAction",
    "account_weights",
    "aggregate",
    "sample_agent_action",
    "sample_prob",
    "strategy_mask",
    "strategy_of",
    "AttackState",
    "Strategy",
    "discretize",
]
