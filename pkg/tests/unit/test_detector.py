"""
Tests for the message-passing detector, its black-box surface and training.
"""

import math

import numpy as np
import pytest

from selab.core.config_service import DetectorHyperparams
from selab.core.exceptions import (
    BlackBoxViolationError,
    DegenerateLabelsError,
    DimensionMismatchError,
    DuplicateEdgeError,
    EmptySubsetError,
)
from selab.detector.model import DetectorModel, DetectorParams, ce_loss, forward, post_inputs
from selab.detector.training import evaluate, refine_with_attacks, split_posts, train
from selab.graph.bipartite import FAKE, REAL, build_graph, with_added_edges

from factories import TINY_DETECTOR, make_graph


def _random_instance(rng: np.random.Generator, dim: int = 3):
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 5))
    users = [f"u{i}" for i in range(m)]
    posts = [f"p{j}" for j in range(n)]
    edges = [(u, p, float(rng.uniform(0.1, 1.0))) for u in users for p in posts if rng.random() < 0.6]
    features = {v: rng.normal(size=dim) for v in users + posts}
    labels = {p: int(rng.integers(0, 2)) for p in posts}
    return build_graph(users, posts, edges, features, features, labels)


def _flat(params: DetectorParams) -> np.ndarray:
    return np.concatenate([params.w1.ravel(), params.b1, params.w2, [params.b2]])


def _numeric_gradient(model: DetectorModel, g, posts, eps: float = 1e-6) -> np.ndarray:
    p = model.params
    grads = []
    for array in (p.w1, p.b1, p.w2):
        flat = array.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            hi = model.loss_and_gradients(g, posts)[0]
            flat[i] = original - eps
            lo = model.loss_and_gradients(g, posts)[0]
            flat[i] = original
            grads.append((hi - lo) / (2 * eps))
    original = p.b2
    p.b2 = original + eps
    hi = model.loss_and_gradients(g, posts)[0]
    p.b2 = original - eps
    lo = model.loss_and_gradients(g, posts)[0]
    p.b2 = original
    grads.append((hi - lo) / (2 * eps))
    return np.array(grads)


class TestGradients:
    """Analytic gradients against central differences"""

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        hp = DetectorHyperparams(hidden=4)
        for i in range(20):
            g = _random_instance(rng)
            model = DetectorModel.initialize(g.feature_dim, hp, seed=i)
            posts = list(g.post_ids)
            _, analytic = model.loss_and_gradients(g, posts)
            numeric = _numeric_gradient(model, g, posts)
            a = _flat(analytic)
            denom = max(np.linalg.norm(a) + np.linalg.norm(numeric), 1e-12)
            assert np.linalg.norm(a - numeric) / denom < 1e-4

    def test_empty_subset(self):
        g = _random_instance(np.random.default_rng(0))
        model = DetectorModel.initialize(g.feature_dim, DetectorHyperparams(hidden=2), seed=0)
        with pytest.raises(EmptySubsetError):
            model.loss_and_gradients(g, [])


class TestBlackBox:
    """Frozen models expose predictions only"""

    def test_frozen_hides_internals(self, frozen_detector, tiny_graph):
        with pytest.raises(BlackBoxViolationError):
            _ = frozen_detector.params
        with pytest.raises(BlackBoxViolationError):
            frozen_detector.loss_and_gradients(tiny_graph, [tiny_graph.post_ids[0]])
        with pytest.raises(BlackBoxViolationError):
            frozen_detector.forward(tiny_graph)

    def test_unfrozen_refuses_queries(self, trained_detector, tiny_graph):
        model, _ = trained_detector
        with pytest.raises(BlackBoxViolationError):
            model.predict_proba(tiny_graph)

    def test_probabilities_in_unit_interval(self, frozen_detector, tiny_graph):
        probs = frozen_detector.predict_proba(tiny_graph)
        assert probs.shape == (tiny_graph.num_posts,)
        assert np.all((probs >= 0.0) & (probs <= 1.0))
        post = tiny_graph.post_ids[3]
        assert frozen_detector.predict_one(tiny_graph, post) == pytest.approx(probs[3])

    def test_feature_dimension_checked(self, frozen_detector):
        g = make_graph(["u0"], ["p0"], [("u0", "p0", 1.0)], dim=2)
        with pytest.raises(DimensionMismatchError):
            frozen_detector.predict_proba(g)

    def test_added_edge_only_moves_its_post(self, frozen_detector, tiny_graph):
        user = next(u for u in tiny_graph.user_ids if not tiny_graph.has_edge(u, tiny_graph.post_ids[0]))
        before = frozen_detector.predict_proba(tiny_graph)
        after = frozen_detector.predict_proba(with_added_edges(tiny_graph, [(user, tiny_graph.post_ids[0])]))
        np.testing.assert_allclose(before[1:], after[1:], atol=1e-12)

    def test_save_and_load_predictions(self, tmp_path, frozen_detector, tiny_graph):
        path = frozen_detector.save(tmp_path / "model.json")
        restored = DetectorModel.load(path)
        assert restored.frozen
        np.testing.assert_allclose(restored.predict_proba(tiny_graph), frozen_detector.predict_proba(tiny_graph))
        assert restored.split == frozen_detector.split


class TestTraining:
    """Splits, training and refinement"""

    def test_split_proportions(self, tiny_graph):
        split = split_posts(tiny_graph, seed=0)
        n = tiny_graph.num_posts
        assert len(split.train) == pytest.approx(0.6 * n, abs=1)
        assert len(split.val) + len(split.test) + len(split.train) == n
        assert not set(split.train) & set(split.heldout)
        assert split_posts(tiny_graph, seed=0) == split

    def test_degenerate_labels(self):
        posts = [f"p{j}" for j in range(6)]
        g = make_graph(["u0"], posts, [("u0", p, 1.0) for p in posts], labels={p: REAL for p in posts})
        with pytest.raises(DegenerateLabelsError):
            split_posts(g, seed=0)
        with pytest.raises(DegenerateLabelsError):
            train(g, TINY_DETECTOR, seed=0)

    def test_loss_decreases(self, trained_detector):
        _, report = trained_detector
        assert len(report.losses) == TINY_DETECTOR.epochs
        assert report.losses[-1] < report.losses[0]
        assert 0.0 <= report.accuracy <= 1.0

    def test_sgd_runs(self, tiny_graph):
        hp = DetectorHyperparams(hidden=4, epochs=20, optimizer="sgd", learning_rate=0.5)
        model, report = train(tiny_graph, hp, seed=1)
        assert report.losses[-1] <= report.losses[0]
        accuracy, f1 = evaluate(model, tiny_graph, model.split.test)
        assert 0.0 <= accuracy <= 1.0 and 0.0 <= f1 <= 1.0

    def test_refinement_returns_frozen_copy(self, trained_detector, tiny_graph):
        model, _ = trained_detector
        fake = next(p for p in tiny_graph.post_ids if tiny_graph.label_of(p) == FAKE)
        user = next(u for u in tiny_graph.user_ids if not tiny_graph.has_edge(u, fake))
        before = model.params.w1.copy()
        refined = refine_with_attacks(model, tiny_graph, [(user, fake)], TINY_DETECTOR, seed=0)
        assert refined.frozen
        np.testing.assert_array_equal(model.params.w1, before)

    def test_post_inputs_shape(self, tiny_graph):
        z = post_inputs(tiny_graph)
        assert z.shape == (tiny_graph.num_posts, 2 * tiny_graph.feature_dim)


class TestForwardAndLoss:
    """Hand-checkable forward pass and cross entropy"""

    @staticmethod
    def _constant_model(dim: int, hidden: int = 3, b2: float = 0.0) -> DetectorModel:
        params = DetectorParams(
            w1=np.zeros((2 * dim, hidden)), b1=np.zeros(hidden), w2=np.zeros(hidden), b2=b2
        )
        return DetectorModel(params, DetectorHyperparams(hidden=hidden))

    def test_zero_weights_score_one_half(self):
        g = _random_instance(np.random.default_rng(4))
        model = self._constant_model(g.feature_dim)
        np.testing.assert_array_equal(forward(model, g), np.full(g.num_posts, 0.5))

    def test_loss_of_uncertain_prediction(self):
        g = make_graph(["u0"], ["p0"], [("u0", "p0", 1.0)], labels={"p0": FAKE})
        assert ce_loss(self._constant_model(2), g, ["p0"]) == pytest.approx(math.log(2.0))

    def test_loss_of_two_confident_posts(self):
        g = make_graph(
            ["u0"], ["p0", "p1"], [("u0", "p0", 1.0), ("u0", "p1", 1.0)], labels={"p0": FAKE, "p1": REAL}
        )
        model = self._constant_model(2, b2=math.log(4.0))
        np.testing.assert_allclose(forward(model, g), [0.8, 0.8])
        assert ce_loss(model, g, ["p0", "p1"]) == pytest.approx(1.8326, abs=1e-4)

    def test_duplicate_post_scores_identically(self):
        rng = np.random.default_rng(9)
        users = ["u0", "u1", "u2"]
        features = {v: rng.normal(size=3) for v in users + ["p0", "p2"]}
        features["p1"] = features["p0"]
        edges = [("u0", "p0", 0.4), ("u1", "p0", 0.9), ("u0", "p1", 0.4), ("u1", "p1", 0.9), ("u2", "p2", 0.7)]
        labels = {"p0": FAKE, "p1": FAKE, "p2": REAL}
        g = build_graph(users, ["p0", "p1", "p2"], edges, features, features, labels)
        model = DetectorModel.initialize(3, DetectorHyperparams(hidden=5), seed=2)
        scores = forward(model, g)
        assert scores[0] == pytest.approx(scores[1], rel=1e-12)

    def test_vertex_order_does_not_matter(self):
        rng = np.random.default_rng(12)
        g = _random_instance(rng)
        users, posts = list(g.user_ids), list(g.post_ids)
        edges = [(users[u], posts[p], float(w)) for u, p, w in zip(g.edge_users, g.edge_posts, g.weights)]
        features = {v: g.user_features[i] for i, v in enumerate(users)}
        features.update({v: g.post_features[j] for j, v in enumerate(posts)})
        labels = {p: g.label_of(p) for p in posts}
        shuffled = build_graph(users[::-1], posts[::-1], edges[::-1], features, features, labels)
        model = DetectorModel.initialize(g.feature_dim, DetectorHyperparams(hidden=4), seed=6)
        original = dict(zip(posts, forward(model, g)))
        reordered = dict(zip(shuffled.post_ids, forward(model, shuffled)))
        for post in posts:
            assert reordered[post] == pytest.approx(original[post], abs=1e-12)


class TestTrainingDeterminism:
    """Seeded training"""

    def test_same_seed_identical_parameters(self, tiny_graph):
        hp = DetectorHyperparams(hidden=4, epochs=15)
        first, _ = train(tiny_graph, hp, seed=3)
        second, _ = train(tiny_graph, hp, seed=3)
        for name, array in first.params.as_arrays().items():
            np.testing.assert_array_equal(array, second.params.as_arrays()[name])

    def test_zero_epochs_keeps_initialization(self, tiny_graph):
        hp = DetectorHyperparams(hidden=4, epochs=0)
        model, report = train(tiny_graph, hp, seed=8)
        initial = DetectorModel.initialize(tiny_graph.feature_dim, hp, seed=8)
        assert report.losses == []
        for name, array in model.params.as_arrays().items():
            np.testing.assert_array_equal(array, initial.params.as_arrays()[name])

    def test_refinement_rejects_existing_edge(self, trained_detector, tiny_graph):
        model, _ = trained_detector
        user, post = tiny_graph.user_ids[tiny_graph.edge_users[0]], tiny_graph.post_ids[tiny_graph.edge_posts[0]]
        with pytest.raises(DuplicateEdgeError):
            refine_with_attacks(model, tiny_graph, [(user, post)], TINY_DETECTOR, seed=0)

    def test_refinement_rejects_repeated_edge(self, trained_detector, tiny_graph):
        model, _ = trained_detector
        fake = next(p for p in tiny_graph.post_ids if tiny_graph.label_of(p) == FAKE)
        user = next(u for u in tiny_graph.user_ids if not tiny_graph.has_edge(u, fake))
        with pytest.raises(DuplicateEdgeError):
            refine_with_attacks(model, tiny_graph, [(user, fake), (user, fake)], TINY_DETECTOR, seed=0)
