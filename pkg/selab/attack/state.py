"""
Attack MDP state and its tabular discretization.
"""

from dataclasses import dataclass
from selab._compat import StrEnum
from typing import Tuple

PROB_BINS = 10
BUDGET_BINS = 4
COUNT_CAP = 3

StateCode = Tuple[int, ...]


class Strategy(StrEnum):
    DIRECT = "direct"
    INDIRECT = "indirect"
    FEEDBACK = "feedback"


STRATEGIES = (Strategy.DIRECT, Strategy.INDIRECT, Strategy.FEEDBACK)


@dataclass(frozen=True)
class AttackState:
    """Target score, per-agent budget fractions (bot, cyborg, worker) and strategy counts."""

    target_fake_prob: float
    budget_used: Tuple[float, float, float]
    strategy_counts: Tuple[int, int, int]

    @property
    def code(self) -> StateCode:
        return discretize(self)


def _bucket(value: float, bins: int) -> int:
    return min(max(int(value * bins), 0), bins - 1)


def discretize(state: AttackState) -> StateCode:
    """``(prob bin, budget bins x3, capped strategy counts x3)``"""
    return (
        _bucket(state.target_fake_prob, PROB_BINS),
        *(_bucket(f, BUDGET_BINS) for f in state.budget_used),
        *(min(c, COUNT_CAP) for c in state.strategy_counts),
    )
