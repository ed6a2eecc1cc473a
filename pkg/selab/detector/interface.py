"""
Abstract interface for black-box post classifiers.
"""

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from selab.graph.bipartite import BipartiteGraph


class BlackBoxDetector(ABC):
    """Prediction-only surface handed to attackers."""

    @abstractmethod
    def predict_proba(self, g: BipartiteGraph, posts: Optional[Sequence[str]] = None) -> np.ndarray:
        """Probability that each requested post (default: all posts) is fake."""
        pass

    def predict_one(self, g: BipartiteGraph, post_id: str) -> float:
        return float(self.predict_proba(g, [post_id])[0])

    def predict_labels(self, g: BipartiteGraph, posts: Optional[Sequence[str]] = None) -> np.ndarray:
        """Hard labels at threshold 0.5."""
        return (self.predict_proba(g, posts) >= 0.5).astype(np.int64)
