"""
Malicious account categorization.

Users are sorted by ascending influence (ties by vertex order) and cut into a
low, a medium and a high slice in proportion to the bot, cyborg and worker
budgets. Each agent's accounts are sampled without replacement from its
slice.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from selab.core.config_service import Budgets
from selab.core.exceptions import InfeasibleBudgetError
from selab.core.logger_manager import get_logger
from selab.entropy.encoding_tree import EncodingTree
from selab.graph.bipartite import BipartiteGraph

from .metric import InfluenceMode, InfluenceTable, compute_influence

logger = get_logger(__name__)

AGENTS = ("bot", "cyborg", "worker")


@dataclass(frozen=True)
class AccountGroups:
    """Disjoint bot / cyborg / worker account sets."""

    bots: Tuple[str, ...]
    cyborgs: Tuple[str, ...]
    workers: Tuple[str, ...]
    influence: InfluenceTable
    budgets: Budgets

    @property
    def malicious(self) -> Tuple[str, ...]:
        return self.bots + self.cyborgs + self.workers

    def accounts(self, agent: str) -> Tuple[str, ...]:
        return {"bot": self.bots, "cyborg": self.cyborgs, "worker": self.workers}[agent]

    def group_of(self, user_id: str) -> Optional[str]:
        for agent in AGENTS:
            if user_id in self.accounts(agent):
                return agent
        return None

    def influence_sum(self, agent: str) -> float:
        return self.influence.total(self.accounts(agent))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bots": list(self.bots),
            "cyborgs": list(self.cyborgs),
            "workers": list(self.workers),
            "influence": dict(self.influence.scores),
            "c": self.influence.c,
            "mode": self.influence.mode,
            "budgets": self.budgets.model_dump(),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "AccountGroups":
        return cls(
            bots=tuple(doc["bots"]),
            cyborgs=tuple(doc["cyborgs"]),
            workers=tuple(doc["workers"]),
            influence=InfluenceTable.from_dict(doc),
            budgets=Budgets(**doc["budgets"]),
        )

    def save(self, path: Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True), encoding="utf-8")
        return target

    @classmethod
    def load(cls, path: Path) -> "AccountGroups":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def slice_bounds(num_users: int, budgets: Budgets) -> Tuple[int, int]:
    """Boundaries ``floor(m * b / D)`` and ``floor(m * (b + c) / D)`` of the sorted user list."""
    total = budgets.total
    if total == 0:
        return 0, 0
    low = math.floor(num_users * budgets.bots / total)
    mid = math.floor(num_users * (budgets.bots + budgets.cyborgs) / total)
    return low, mid


def rank_users(g: BipartiteGraph, table: InfluenceTable) -> List[str]:
    """Users by ascending influence; equal scores keep vertex order."""
    return sorted(g.user_ids, key=lambda u: (table[u], g.vertex_index(u)))


def categorize(
    g: BipartiteGraph,
    t: Optional[EncodingTree],
    c: float,
    budgets: Budgets,
    seed: int,
    table: Optional[InfluenceTable] = None,
    mode: InfluenceMode = "tree",
) -> AccountGroups:
    """Split users into influence slices and sample each agent's accounts."""
    table = table or compute_influence(g, t, c, mode)
    if budgets.total > g.num_users:
        raise InfeasibleBudgetError("all", g.num_users, budgets.total)

    ranked = rank_users(g, table)
    low, mid = slice_bounds(len(ranked), budgets)
    slices = {"bot": ranked[:low], "cyborg": ranked[low:mid], "worker": ranked[mid:]}
    if budgets.total == 0:
        slices = {agent: [] for agent in AGENTS}
    wanted = {"bot": budgets.bots, "cyborg": budgets.cyborgs, "worker": budgets.workers}

    rng = np.random.default_rng(seed)
    chosen: Dict[str, Tuple[str, ...]] = {}
    for agent in AGENTS:
        pool = slices[agent]
        budget = wanted[agent]
        if len(pool) < budget:
            raise InfeasibleBudgetError(agent, len(pool), budget)
        picks = np.sort(rng.choice(len(pool), size=budget, replace=False)) if budget else []
        chosen[agent] = tuple(pool[i] for i in picks)

    groups = AccountGroups(
        bots=chosen["bot"],
        cyborgs=chosen["cyborg"],
        workers=chosen["worker"],
        influence=table,
        budgets=budgets,
    )
    logger.info(
        f"Categorized {len(groups.malicious)} malicious accounts "
        f"({budgets.bots} bots, {budgets.cyborgs} cyborgs, {budgets.workers} workers)"
    )
    return groups
