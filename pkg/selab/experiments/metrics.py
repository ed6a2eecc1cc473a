"""
Metric aggregation across seeds.

A ``MetricsReport`` holds one ``CellMetrics`` per (attack, phase) pair, where
the phase is the detector state the attack ran against (``clean`` or
``refined``). Wall-clock timings are kept apart from everything that goes
into the report files.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from selab.attack.engine import MAIN_ATTACK, AttackResult
from selab.attack.state import STRATEGIES

CLEAN = "clean"
REFINED = "refined"
PHASES = (CLEAN, REFINED)

DEGREE_BUCKETS: Tuple[Tuple[float, float], ...] = ((0, 10), (10, 100), (100, math.inf))


def bucket_label(low: float, high: float) -> str:
    return f"[{int(low)},{'inf' if math.isinf(high) else int(high)})"


def degree_bucket(degree: int) -> str:
    for low, high in DEGREE_BUCKETS:
        if low <= degree < high:
            return bucket_label(low, high)
    raise ValueError(f"negative degree {degree}")


def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


@dataclass
class CellMetrics:
    """Per-seed and pooled metrics of one attack against one detector state."""

    attack: str
    phase: str
    success: List[float] = field(default_factory=list)
    prob_before: List[float] = field(default_factory=list)
    prob_after: List[float] = field(default_factory=list)
    first_success: List[int] = field(default_factory=list)
    strategy_counts: Dict[str, int] = field(default_factory=lambda: {str(s): 0 for s in STRATEGIES})
    degree_hits: Dict[str, List[int]] = field(
        default_factory=lambda: {bucket_label(lo, hi): [0, 0] for lo, hi in DEGREE_BUCKETS}
    )

    def add(self, result: AttackResult) -> None:
        self.success.append(result.success_rate)
        self.prob_before.append(result.mean_prob_before)
        self.prob_after.append(result.mean_prob_after)
        for outcome in result.outcomes:
            if outcome.success and outcome.first_success is not None:
                self.first_success.append(outcome.first_success)
            for name, count in outcome.strategy_counts.items():
                self.strategy_counts[name] += count
            hits = self.degree_hits[degree_bucket(outcome.degree)]
            hits[0] += int(outcome.success)
            hits[1] += 1

    @property
    def mean(self) -> float:
        return float(np.mean(self.success)) if self.success else 0.0

    @property
    def std(self) -> float:
        """Population standard deviation over seeds."""
        return float(np.std(self.success)) if self.success else 0.0

    @property
    def mean_prob_before(self) -> Optional[float]:
        return _mean(self.prob_before)

    @property
    def mean_prob_after(self) -> Optional[float]:
        return _mean(self.prob_after)

    def strategy_shares(self) -> Dict[str, float]:
        n = sum(self.strategy_counts.values())
        return {name: (count / n if n else 0.0) for name, count in self.strategy_counts.items()}

    def degree_rates(self) -> Dict[str, Optional[float]]:
        return {label: (hits[0] / hits[1] if hits[1] else None) for label, hits in self.degree_hits.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attack": self.attack,
            "phase": self.phase,
            "success_mean": self.mean,
            "success_std": self.std,
            "success_by_seed": list(self.success),
            "prob_before": list(self.prob_before),
            "prob_after": list(self.prob_after),
            "mean_prob_before": self.mean_prob_before,
            "mean_prob_after": self.mean_prob_after,
            "first_success": list(self.first_success),
            "mean_first_success": _mean(self.first_success),
            "strategy_counts": dict(self.strategy_counts),
            "strategy_shares": self.strategy_shares(),
            "degree_hits": {k: list(v) for k, v in self.degree_hits.items()},
            "degree_success": self.degree_rates(),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "CellMetrics":
        return cls(
            attack=doc["attack"],
            phase=doc["phase"],
            success=list(doc["success_by_seed"]),
            prob_before=list(doc["prob_before"]),
            prob_after=list(doc["prob_after"]),
            first_success=list(doc["first_success"]),
            strategy_counts=dict(doc["strategy_counts"]),
            degree_hits={k: list(v) for k, v in doc["degree_hits"].items()},
        )


@dataclass
class SeedRow:
    """Headline numbers of one seed's pipeline."""

    seed: int
    targets: int
    tree_entropy: float
    single_layer_entropy: float
    clean_accuracy: float
    clean_f1: float
    refined_accuracy: Optional[float]
    refined_f1: Optional[float]
    manipulated_edges: int
    success: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "targets": self.targets,
            "tree_entropy": self.tree_entropy,
            "single_layer_entropy": self.single_layer_entropy,
            "clean_accuracy": self.clean_accuracy,
            "clean_f1": self.clean_f1,
            "refined_accuracy": self.refined_accuracy,
            "refined_f1": self.refined_f1,
            "manipulated_edges": self.manipulated_edges,
            "success": dict(self.success),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SeedRow":
        return cls(**doc)


def sign_test(main: Sequence[float], other: Sequence[float]) -> float:
    """One-sided paired sign test that ``main`` beats ``other``; ties are dropped."""
    wins = sum(1 for a, b in zip(main, other) if a > b)
    losses = sum(1 for a, b in zip(main, other) if a < b)
    if wins + losses == 0:
        return 1.0
    return float(binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


@dataclass
class MetricsReport:
    name: str
    seeds: List[int]
    cells: Dict[Tuple[str, str], CellMetrics] = field(default_factory=dict)
    rows: List[SeedRow] = field(default_factory=list)
    timings: Dict[int, Dict[str, float]] = field(default_factory=dict)

    def cell(self, attack: str, phase: str) -> CellMetrics:
        key = (attack, phase)
        if key not in self.cells:
            self.cells[key] = CellMetrics(attack=attack, phase=phase)
        return self.cells[key]

    def add_seed(self, row: SeedRow, results: Dict[Tuple[str, str], AttackResult], timings: Dict[str, float]) -> None:
        self.rows.append(row)
        for (attack, phase), result in results.items():
            self.cell(attack, phase).add(result)
        self.timings[row.seed] = dict(timings)

    @property
    def attacks(self) -> List[str]:
        names = {attack for attack, _ in self.cells}
        return sorted(names, key=lambda a: (a != MAIN_ATTACK, a))

    @property
    def phases(self) -> List[str]:
        present = {phase for _, phase in self.cells}
        return [p for p in PHASES if p in present]

    def ordered_cells(self) -> List[CellMetrics]:
        return [self.cells[(a, p)] for a in self.attacks for p in self.phases if (a, p) in self.cells]

    def success_rate(self, attack: str, phase: str = CLEAN) -> float:
        return self.cells[(attack, phase)].mean

    def accuracy(self, phase: str = CLEAN) -> List[float]:
        if phase == CLEAN:
            return [r.clean_accuracy for r in self.rows]
        return [r.refined_accuracy for r in self.rows if r.refined_accuracy is not None]

    def sign_tests(self, phase: str = CLEAN) -> Dict[str, float]:
        """p-values of the main attack against every other attack in ``phase``."""
        main = self.cells.get((MAIN_ATTACK, phase))
        if main is None:
            return {}
        return {
            attack: sign_test(main.success, self.cells[(attack, phase)].success)
            for attack in self.attacks
            if attack != MAIN_ATTACK and (attack, phase) in self.cells
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "seeds": list(self.seeds),
            "cells": [c.to_dict() for c in self.ordered_cells()],
            "accuracy": {phase: self.accuracy(phase) for phase in PHASES},
            "seed_rows": [r.to_dict() for r in self.rows],
            "sign_tests": {phase: self.sign_tests(phase) for phase in self.phases},
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "MetricsReport":
        report = cls(name=doc["name"], seeds=list(doc["seeds"]))
        for cell_doc in doc["cells"]:
            cell = CellMetrics.from_dict(cell_doc)
            report.cells[(cell.attack, cell.phase)] = cell
        report.rows = [SeedRow.from_dict(r) for r in doc["seed_rows"]]
        return report
