"""
One-layer message-passing fake post classifier.

Each post aggregates the edge-weighted mean of its neighbouring users'
features, concatenates it with its own features and feeds the result through
``tanh`` and a linear head with a sigmoid. Adding an edge therefore changes
only the score of the post it touches.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.special import expit

from selab.core.config_service import DetectorHyperparams
from selab.core.exceptions import BlackBoxViolationError, DimensionMismatchError, EmptySubsetError
from selab.core.logger_manager import get_logger
from selab.graph.bipartite import BipartiteGraph

from .interface import BlackBoxDetector

logger = get_logger(__name__)

PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class PostSplit:
    """Train / validation / test post ids."""

    train: Tuple[str, ...]
    val: Tuple[str, ...]
    test: Tuple[str, ...]

    @property
    def heldout(self) -> Tuple[str, ...]:
        return self.val + self.test

    def to_dict(self) -> Dict[str, Any]:
        return {"train": list(self.train), "val": list(self.val), "test": list(self.test)}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "PostSplit":
        return cls(train=tuple(doc["train"]), val=tuple(doc["val"]), test=tuple(doc["test"]))


@dataclass
class DetectorParams:
    w1: np.ndarray  # (2d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float

    def copy(self) -> "DetectorParams":
        return DetectorParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), float(self.b2))

    def as_arrays(self) -> Dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": np.array(self.b2)}


def post_inputs(g: BipartiteGraph) -> np.ndarray:
    """``[own features | weighted mean of neighbour-user features]`` per post."""
    adjacency = sparse.csr_matrix(
        (g.weights, (g.edge_posts, g.edge_users)), shape=(g.num_posts, g.num_users)
    )
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    summed = np.asarray(adjacency @ g.user_features)
    aggregated = np.zeros_like(summed)
    has_neighbours = degree > 0.0
    aggregated[has_neighbours] = summed[has_neighbours] / degree[has_neighbours, None]
    return np.hstack([g.post_features, aggregated])


def _hidden(params: DetectorParams, z: np.ndarray) -> np.ndarray:
    return np.tanh(z @ params.w1 + params.b1)


def _scores(params: DetectorParams, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h = _hidden(params, z)
    return h, expit(h @ params.w2 + params.b2)


class DetectorModel(BlackBoxDetector):
    """Trainable detector; :meth:`freeze` turns a copy into a black box."""

    def __init__(
        self,
        params: DetectorParams,
        hyperparams: DetectorHyperparams,
        split: Optional[PostSplit] = None,
        frozen: bool = False,
    ):
        self._params = params
        self.hyperparams = hyperparams
        self.split = split
        self._frozen = frozen

    @classmethod
    def initialize(cls, feature_dim: int, hyperparams: DetectorHyperparams, seed: int) -> "DetectorModel":
        """Uniform ``[-a, a]`` initialization with ``a = 1 / sqrt(fan_in)``."""
        rng = np.random.default_rng(seed)
        fan_in = 2 * feature_dim
        a1 = 1.0 / np.sqrt(fan_in)
        a2 = 1.0 / np.sqrt(hyperparams.hidden)
        params = DetectorParams(
            w1=rng.uniform(-a1, a1, size=(fan_in, hyperparams.hidden)),
            b1=rng.uniform(-a1, a1, size=hyperparams.hidden),
            w2=rng.uniform(-a2, a2, size=hyperparams.hidden),
            b2=float(rng.uniform(-a2, a2)),
        )
        return cls(params, hyperparams)

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def input_dim(self) -> int:
        return int(self._params.w1.shape[0])

    @property
    def params(self) -> DetectorParams:
        if self._frozen:
            raise BlackBoxViolationError("parameters of a frozen detector are not accessible")
        return self._params

    def freeze(self) -> "DetectorModel":
        return DetectorModel(self._params.copy(), self.hyperparams, self.split, frozen=True)

    def unfrozen_copy(self) -> "DetectorModel":
        """Owner-side copy used to continue training."""
        return DetectorModel(self._params.copy(), self.hyperparams, self.split, frozen=False)

    def _inputs(self, g: BipartiteGraph) -> np.ndarray:
        if 2 * g.feature_dim != self.input_dim:
            raise DimensionMismatchError(self.input_dim // 2, g.feature_dim)
        return post_inputs(g)

    def _probabilities(self, g: BipartiteGraph) -> np.ndarray:
        return _scores(self._params, self._inputs(g))[1]

    def forward(self, g: BipartiteGraph) -> np.ndarray:
        """Fake probability of every post, in ``g.post_ids`` order."""
        if self._frozen:
            raise BlackBoxViolationError("forward is not available on a frozen detector; use predict_proba")
        return self._probabilities(g)

    def predict_proba(self, g: BipartiteGraph, posts: Optional[Sequence[str]] = None) -> np.ndarray:
        if not self._frozen:
            raise BlackBoxViolationError("black-box queries require a frozen detector")
        probs = self._probabilities(g)
        if posts is None:
            return probs
        return probs[[g.post_index(p) for p in posts]]

    # ------------------------------------------------------------------
    # loss and gradients
    # ------------------------------------------------------------------
    def loss_and_gradients(
        self, g: BipartiteGraph, posts: Sequence[str], inputs: Optional[np.ndarray] = None
    ) -> Tuple[float, DetectorParams]:
        """Summed cross entropy over ``posts`` and its analytic gradient."""
        if self._frozen:
            raise BlackBoxViolationError("gradients of a frozen detector are not accessible")
        if not posts:
            raise EmptySubsetError()
        z_all = self._inputs(g) if inputs is None else inputs
        rows = np.array([g.post_index(p) for p in posts], dtype=np.int64)
        z = z_all[rows]
        y = g.labels[rows].astype(float)
        p = self._params
        h, prob = _scores(p, z)
        clamped = np.clip(prob, PROB_CLAMP, 1.0 - PROB_CLAMP)
        loss = float(-(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped)).sum())

        ds = prob - y
        dw2 = h.T @ ds
        db2 = float(ds.sum())
        da = np.outer(ds, p.w2) * (1.0 - h**2)
        dw1 = z.T @ da
        db1 = da.sum(axis=0)
        return loss, DetectorParams(w1=dw1, b1=db1, w2=dw2, b2=db2)

    def apply_update(self, update: DetectorParams) -> None:
        """Subtract ``update`` from the parameters in place."""
        if self._frozen:
            raise BlackBoxViolationError("a frozen detector cannot be updated")
        self._params.w1 -= update.w1
        self._params.b1 -= update.b1
        self._params.w2 -= update.w2
        self._params.b2 -= update.b2

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_dict(self) -> Dict[str, Any]:
        p = self._params
        return {
            "weights": {"w1": p.w1.tolist(), "w2": p.w2.tolist()},
            "biases": {"b1": p.b1.tolist(), "b2": p.b2},
            "hyperparams": self.hyperparams.model_dump(),
            "frozen": self._frozen,
            "split": self.split.to_dict() if self.split else None,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "DetectorModel":
        params = DetectorParams(
            w1=np.asarray(doc["weights"]["w1"], dtype=float),
            b1=np.asarray(doc["biases"]["b1"], dtype=float),
            w2=np.asarray(doc["weights"]["w2"], dtype=float),
            b2=float(doc["biases"]["b2"]),
        )
        split = PostSplit.from_dict(doc["split"]) if doc.get("split") else None
        return cls(params, DetectorHyperparams(**doc["hyperparams"]), split, frozen=bool(doc.get("frozen", False)))

    def save(self, path: Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        logger.info(f"Detector written to {target}")
        return target

    @classmethod
    def load(cls, path: Path) -> "DetectorModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def forward(model: DetectorModel, g: BipartiteGraph) -> np.ndarray:
    return model.forward(g)


def ce_loss(model: DetectorModel, g: BipartiteGraph, posts: Sequence[str]) -> float:
    """Summed binary cross entropy (natural log) over ``posts``."""
    return model.loss_and_gradients(g, posts)[0]


def predict_proba(black_box: BlackBoxDetector, g: BipartiteGraph, post_id: str) -> float:
    return black_box.predict_one(g, post_id)

