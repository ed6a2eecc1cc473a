"""
Per-agent tabular Q-learning policies.
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import DefaultDict, Dict, Mapping, Optional, Sequence

import numpy as np

from selab.core.exceptions import AgentExhaustedError
from selab.core.logger_manager import get_logger

from .state import StateCode

logger = get_logger(__name__)


@dataclass(frozen=True)
class Transition:
    state: StateCode
    action: int
    reward: float
    next_state: StateCode
    terminal: bool


def epsilon_schedule(episode: int, episodes: int, start: float, end: float, decay_fraction: float) -> float:
    """Linear decay from ``start`` to ``end`` over the first ``decay_fraction`` of the episodes."""
    horizon = max(1, int(round(decay_fraction * episodes)))
    progress = min(1.0, episode / horizon)
    return start + (end - start) * progress


class AgentPolicy:
    """Q table over (state code, action post index) for one agent's accounts."""

    def __init__(
        self,
        kind: str,
        accounts: Sequence[str],
        n_actions: int,
        gamma: float = 0.95,
        learning_rate: float = 0.1,
        epsilon: float = 1.0,
    ):
        self.kind = kind
        self.accounts = tuple(accounts)
        self.n_actions = n_actions
        self.gamma = gamma
        self.learning_rate = learning_rate
        self.epsilon = epsilon
        self.q: DefaultDict[StateCode, np.ndarray] = defaultdict(lambda: np.zeros(self.n_actions))
        self.q_target: Dict[StateCode, np.ndarray] = {}

    def target_values(self, code: StateCode) -> np.ndarray:
        values = self.q_target.get(code)
        return values if values is not None else np.zeros(self.n_actions)

    def sync_target(self) -> None:
        self.q_target = {code: values.copy() for code, values in self.q.items()}

    def greedy(self, code: StateCode, feasible: np.ndarray) -> int:
        """Feasible action with the largest Q value; ties go to the lowest index."""
        values = np.where(feasible, self.q[code], -np.inf)
        return int(np.argmax(values))

    def propose(
        self, code: StateCode, feasible: Mapping[str, np.ndarray], rng: np.random.Generator
    ) -> Dict[str, Optional[int]]:
        """Epsilon-greedy post choice per account; ``None`` marks an inactive account."""
        proposals: Dict[str, Optional[int]] = {}
        for account in self.accounts:
            mask = feasible.get(account)
            if mask is None or not mask.any():
                proposals[account] = None
                continue
            if rng.random() < self.epsilon:
                proposals[account] = int(rng.choice(np.flatnonzero(mask)))
            else:
                proposals[account] = self.greedy(code, mask)
        if all(choice is None for choice in proposals.values()):
            raise AgentExhaustedError(self.kind)
        return proposals

    def q_update(
        self, transition: Transition, gamma: Optional[float] = None, learning_rate: Optional[float] = None
    ) -> float:
        """One TD step towards ``r + gamma * max Q_target(s')``; returns the TD error.

        ``gamma`` and ``learning_rate`` override the policy's own values for this step only.
        """
        gamma = self.gamma if gamma is None else gamma
        learning_rate = self.learning_rate if learning_rate is None else learning_rate
        target = transition.reward
        if not transition.terminal:
            target += gamma * float(self.target_values(transition.next_state).max())
        row = self.q[transition.state]
        td_error = target - float(row[transition.action])
        row[transition.action] += learning_rate * td_error
        return td_error


def q_update(agent: AgentPolicy, transition: Transition, gamma: float, learning_rate: float) -> float:
    return agent.q_update(transition, gamma, learning_rate)
