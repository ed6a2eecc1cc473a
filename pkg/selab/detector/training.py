"""
Full-batch training, evaluation and adversarial refinement of the detector.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import accuracy_score, f1_score
from sklearn.model_selection import train_test_split

from selab.core.config_service import DetectorHyperparams
from selab.core.exceptions import DegenerateLabelsError
from selab.core.logger_manager import get_logger, log_execution_time
from selab.graph.bipartite import BipartiteGraph, with_added_edges

from .model import DetectorModel, DetectorParams, PostSplit, post_inputs

logger = get_logger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


@dataclass
class TrainReport:
    """Per-epoch mean training loss and held-out metrics."""

    losses: List[float] = field(default_factory=list)
    val_accuracy: float = 0.0
    test_accuracy: float = 0.0
    test_f1: float = 0.0

    @property
    def accuracy(self) -> float:
        return self.test_accuracy

    @property
    def f1(self) -> float:
        return self.test_f1

    def to_dict(self) -> Dict[str, object]:
        return {
            "losses": self.losses,
            "val_accuracy": self.val_accuracy,
            "test_accuracy": self.test_accuracy,
            "test_f1": self.test_f1,
        }


def _sk_seed(seed: int) -> int:
    return int(seed) % (2**32)


def split_posts(g: BipartiteGraph, seed: int) -> PostSplit:
    """60/20/20 split by post, stratified by label when every class allows it."""
    posts = list(g.post_ids)
    labels = g.labels.tolist()
    if len(set(labels)) < 2:
        raise DegenerateLabelsError(details={"classes": sorted(set(labels))})
    try:
        train, rest, _, rest_labels = train_test_split(
            posts, labels, test_size=0.4, stratify=labels, random_state=_sk_seed(seed)
        )
        val, test = train_test_split(rest, test_size=0.5, stratify=rest_labels, random_state=_sk_seed(seed))
    except ValueError as e:
        logger.warning(f"Stratified split impossible ({e}); falling back to a plain random split")
        train, rest = train_test_split(posts, test_size=0.4, random_state=_sk_seed(seed))
        val, test = train_test_split(rest, test_size=0.5, random_state=_sk_seed(seed))

    train_labels = [g.label_of(p) for p in train]
    counts = {label: train_labels.count(label) for label in (0, 1)}
    if min(counts.values()) < 2:
        raise DegenerateLabelsError(
            "degenerate labels: the training split needs at least 2 posts per class",
            {"train_counts": counts},
        )
    return PostSplit(train=tuple(train), val=tuple(val), test=tuple(test))


class _Optimizer:
    """Full-batch SGD or Adam over :class:`DetectorParams`."""

    def __init__(self, kind: str, learning_rate: float):
        self.kind = kind
        self.learning_rate = learning_rate
        self.step_count = 0
        self._m: Optional[Dict[str, np.ndarray]] = None
        self._v: Optional[Dict[str, np.ndarray]] = None

    def update(self, grads: DetectorParams) -> DetectorParams:
        if self.kind == "sgd":
            lr = self.learning_rate
            return DetectorParams(lr * grads.w1, lr * grads.b1, lr * grads.w2, lr * grads.b2)

        arrays = grads.as_arrays()
        if self._m is None or self._v is None:
            self._m = {k: np.zeros_like(v) for k, v in arrays.items()}
            self._v = {k: np.zeros_like(v) for k, v in arrays.items()}
        self.step_count += 1
        b1, b2 = ADAM_BETAS
        steps: Dict[str, np.ndarray] = {}
        for name, grad in arrays.items():
            self._m[name] = b1 * self._m[name] + (1.0 - b1) * grad
            self._v[name] = b2 * self._v[name] + (1.0 - b2) * grad**2
            m_hat = self._m[name] / (1.0 - b1**self.step_count)
            v_hat = self._v[name] / (1.0 - b2**self.step_count)
            steps[name] = self.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        return DetectorParams(steps["w1"], steps["b1"], steps["w2"], float(steps["b2"]))


def _fit(
    model: DetectorModel, g: BipartiteGraph, posts: Sequence[str], hyperparams: DetectorHyperparams, epochs: int
) -> List[float]:
    """Minimise mean cross entropy plus L2 weight decay; returns per-epoch mean loss."""
    inputs = post_inputs(g)
    optimizer = _Optimizer(hyperparams.optimizer, hyperparams.learning_rate)
    n = float(len(posts))
    losses: List[float] = []
    for _ in range(epochs):
        loss, grads = model.loss_and_gradients(g, posts, inputs=inputs)
        params = model.params
        wd = hyperparams.weight_decay
        mean_grads = DetectorParams(
            w1=grads.w1 / n + wd * params.w1,
            b1=grads.b1 / n,
            w2=grads.w2 / n + wd * params.w2,
            b2=grads.b2 / n,
        )
        model.apply_update(optimizer.update(mean_grads))
        losses.append(loss / n)
    return losses


def evaluate(model: DetectorModel, g: BipartiteGraph, posts: Iterable[str]) -> Tuple[float, float]:
    """Accuracy and F1 (fake = positive class) on ``posts``."""
    posts = list(posts)
    if not posts:
        return 0.0, 0.0
    probs = model.predict_proba(g, posts) if model.frozen else model.forward(g)[[g.post_index(p) for p in posts]]
    y_pred = (probs >= 0.5).astype(int)
    y_true = [g.label_of(p) for p in posts]
    return float(accuracy_score(y_true, y_pred)), float(f1_score(y_true, y_pred, zero_division=0))


@log_execution_time()
def train(
    g: BipartiteGraph, hyperparams: DetectorHyperparams, seed: int, split: Optional[PostSplit] = None
) -> Tuple[DetectorModel, TrainReport]:
    """Train a fresh detector on the training split of ``g``."""
    split = split or split_posts(g, seed)
    model = DetectorModel.initialize(g.feature_dim, hyperparams, seed)
    model.split = split
    report = TrainReport(losses=_fit(model, g, split.train, hyperparams, hyperparams.epochs))
    report.val_accuracy, _ = evaluate(model, g, split.val)
    report.test_accuracy, report.test_f1 = evaluate(model, g, split.test)
    logger.info(
        f"Detector trained for {hyperparams.epochs} epochs: "
        f"test accuracy {report.test_accuracy:.3f}, F1 {report.test_f1:.3f}"
    )
    return model, report


@log_execution_time()
def refine_with_attacks(
    model: DetectorModel,
    g: BipartiteGraph,
    manipulated_edges: Iterable[Tuple[str, str]],
    hyperparams: DetectorHyperparams,
    seed: int,
) -> DetectorModel:
    """Continue training on ``g`` plus the manipulated edges; returns a frozen model."""
    edges = list(manipulated_edges)
    enriched = with_added_edges(g, edges)
    refined = model.unfrozen_copy()
    if refined.split is None:
        refined.split = split_posts(g, seed)
    losses = _fit(refined, enriched, refined.split.train, hyperparams, hyperparams.refine_epochs)
    logger.info(
        f"Detector refined on {len(edges)} manipulated edges for {hyperparams.refine_epochs} epochs"
        + (f", final loss {losses[-1]:.4f}" if losses else "")
    )
    return refined.freeze()
