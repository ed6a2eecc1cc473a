"""
Pytest configuration and shared fixtures for all tests.
"""

import os
import sys

import pytest

# Add the repository root and the tests directory to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from selab.core.config_service import get_settings  # noqa: E402
from selab.detector.training import train  # noqa: E402
from selab.entropy.optimizer import optimize_tree  # noqa: E402
from selab.graph.bipartite import BipartiteGraph  # noqa: E402
from selab.graph.synthetic import generate_synthetic  # noqa: E402
from selab.influence.categorize import categorize  # noqa: E402

from factories import TINY_BUDGETS, TINY_DETECTOR, TINY_SPEC, ScriptedDetector, bridged_cycles, make_graph  # noqa: E402


@pytest.fixture(autouse=True)
def reset_settings():
    """Clear the cached settings singleton between tests"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def star_graph() -> BipartiteGraph:
    """K_{1,3}: one user engaging three posts with unit weights"""
    return make_graph(["u0"], ["p0", "p1", "p2"], [("u0", p, 1.0) for p in ("p0", "p1", "p2")])


@pytest.fixture
def single_edge_graph() -> BipartiteGraph:
    return make_graph(["u0"], ["p0"], [("u0", "p0", 1.0)])


@pytest.fixture
def three_cycles_graph() -> BipartiteGraph:
    """Three unit-weight 4-cycles chained by 0.01-weight bridges"""
    return bridged_cycles("abc")


@pytest.fixture
def two_stars_graph() -> BipartiteGraph:
    """Two K_{1,3} stars joined by one 0.01-weight bridge (8 vertices)"""
    users = ["ua", "ub"]
    posts = ["pa0", "pa1", "pa2", "pb0", "pb1", "pb2"]
    edges = [(u, f"p{u[1]}{i}", 1.0) for u in users for i in range(3)]
    edges.append(("ua", "pb0", 0.01))
    return make_graph(users, posts, edges)


@pytest.fixture(scope="session")
def tiny_graph() -> BipartiteGraph:
    return generate_synthetic(TINY_SPEC, seed=7)


@pytest.fixture(scope="session")
def tiny_tree(tiny_graph):
    return optimize_tree(tiny_graph, 3)


@pytest.fixture(scope="session")
def tiny_groups(tiny_graph, tiny_tree):
    return categorize(tiny_graph, tiny_tree, 0.3, TINY_BUDGETS, seed=3)


@pytest.fixture(scope="session")
def trained_detector(tiny_graph):
    """(unfrozen model, train report) on the tiny synthetic graph"""
    return train(tiny_graph, TINY_DETECTOR, seed=11)


@pytest.fixture(scope="session")
def frozen_detector(trained_detector):
    model, _ = trained_detector
    return model.freeze()


@pytest.fixture
def scripted_detector():
    """Fake probability drops by 0.2 for each engagement beyond the clean degree"""

    def factory(clean: BipartiteGraph, start: float = 0.9, step: float = 0.2) -> ScriptedDetector:
        base = {p: clean.post_degree(p) for p in clean.post_ids}
        return ScriptedDetector(lambda g, p: max(start - step * (g.post_degree(p) - base[p]), 0.0))

    return factory


@pytest.fixture
def tiny_config_dict(tmp_path) -> dict:
    """Small, fast experiment configuration document"""
    return {
        "name": "tiny",
        "synthetic": TINY_SPEC.model_dump(),
        "height": 3,
        "budgets": TINY_BUDGETS.model_dump(),
        "detector": {"hidden": 8, "epochs": 60, "refine_epochs": 10},
        "attack": {"episodes": 2, "t_up": 3},
        "baselines": ["random", "dice"],
        "defend": True,
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "run"),
    }
