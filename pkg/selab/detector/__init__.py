"""
Message-passing fake post detector with a black-box prediction surface.
"""

from .interface import BlackBoxDetector
from .model import DetectorModel, DetectorParams, PostSplit, ce_loss, forward, post_inputs, predict_proba
from .training import TrainReport, evaluate, refine_with_attacks, split_posts, train

__all__ = [
    "BlackBoxDetector",
    "DetectorModel",
    "DetectorParams",
    "PostSplit",
    "ce_loss",
    "forward",
    "post_inputs",
    "predict_proba",
    "TrainReport",
    "evaluate",
    "refine_with_attacks",
    "split_posts",
    "train",
]
