"""
Tests for the bipartite graph core: weights, construction, volume and cut.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selab.core.exceptions import (
    DanglingEndpointError,
    DuplicateEdgeError,
    GraphError,
    UndefinedCosineError,
    UnknownVertexError,
)
from selab.graph.bipartite import (
    FAKE,
    REAL,
    build_graph,
    cut,
    edge_weight,
    relabel_users,
    unweighted,
    volume,
    with_added_edges,
)

from factories import make_graph, random_graph

vectors = st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3
)


class TestEdgeWeight:
    """Cosine-derived edge weights"""

    def test_parallel_and_opposite_vectors(self):
        assert edge_weight([1, 0], [2, 0]) == pytest.approx(1.0)
        assert edge_weight([1, 0], [-3, 0]) == pytest.approx(0.0)
        assert edge_weight([1, 0], [0, 1]) == pytest.approx(0.5)

    def test_zero_vector_is_undefined(self):
        with pytest.raises(UndefinedCosineError):
            edge_weight([0, 0], [1, 0])

    @given(vectors, vectors)
    @settings(max_examples=100, deadline=None)
    def test_weight_in_unit_interval_and_symmetric(self, u, p):
        w = edge_weight(u, p)
        assert 0.0 <= w <= 1.0
        assert w == pytest.approx(edge_weight(p, u))

    @given(vectors, vectors, st.floats(min_value=0.1, max_value=100))
    @settings(max_examples=50, deadline=None)
    def test_scale_invariant(self, u, p, scale):
        assert edge_weight(np.array(u) * scale, p) == pytest.approx(edge_weight(u, p), abs=1e-9)


class TestBuildGraph:
    """Validation performed by build_graph"""

    def test_vertex_layout_and_degrees(self, star_graph):
        assert star_graph.num_users == 1
        assert star_graph.num_posts == 3
        assert star_graph.vertex_ids == ("u0", "p0", "p1", "p2")
        assert star_graph.degree("u0") == pytest.approx(3.0)
        assert star_graph.degree("p1") == pytest.approx(1.0)
        assert star_graph.total_volume == pytest.approx(6.0)
        assert star_graph.post_degree("p2") == 1

    def test_missing_weights_come_from_features(self):
        g = build_graph(
            ["u"], ["p"], [("u", "p")], {"u": [1.0, 0.0]}, {"p": [0.0, 1.0]}, {"p": FAKE}
        )
        assert g.weights[0] == pytest.approx(0.5)
        assert g.label_of("p") == FAKE

    def test_dangling_endpoint(self):
        with pytest.raises(DanglingEndpointError) as exc:
            make_graph(["u0"], ["p0"], [("u0", "p9", 1.0)])
        assert exc.value.vertex_id == "p9"

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdgeError):
            make_graph(["u0"], ["p0"], [("u0", "p0", 1.0), ("u0", "p0", 0.5)])

    def test_overlapping_ids_rejected(self):
        with pytest.raises(GraphError):
            make_graph(["x"], ["x"], [])

    def test_labels_must_be_binary(self):
        with pytest.raises(GraphError):
            make_graph(["u0"], ["p0"], [("u0", "p0", 1.0)], labels={"p0": 2})

    def test_weight_out_of_range(self):
        with pytest.raises(GraphError):
            make_graph(["u0"], ["p0"], [("u0", "p0", 1.5)])

    def test_unknown_vertex_lookup(self, star_graph):
        with pytest.raises(UnknownVertexError):
            star_graph.vertex_index("nobody")


class TestVolumeAndCut:
    """Volume and cut of vertex sets"""

    def test_star_values(self, star_graph):
        assert volume(star_graph, ["u0"]) == pytest.approx(3.0)
        assert cut(star_graph, ["u0", "p0"]) == pytest.approx(2.0)
        assert cut(star_graph, star_graph.vertex_ids) == pytest.approx(0.0)

    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=0, max_value=2**16))
    @settings(max_examples=60, deadline=None)
    def test_cut_of_complement_is_equal(self, seed, mask_bits):
        g = random_graph(np.random.default_rng(seed))
        chosen = [v for i, v in enumerate(g.vertex_ids) if mask_bits >> i & 1]
        rest = [v for v in g.vertex_ids if v not in chosen]
        assert cut(g, chosen) == pytest.approx(cut(g, rest))
        assert volume(g, chosen) + volume(g, rest) == pytest.approx(g.total_volume)
        assert cut(g, chosen) <= min(volume(g, chosen), volume(g, rest)) + 1e-12


class TestGraphEdits:
    """Copy-on-write graph modifications"""

    def test_with_added_edges_leaves_original_untouched(self):
        g = make_graph(["u0", "u1"], ["p0"], [("u0", "p0", 1.0)])
        g2 = with_added_edges(g, [("u1", "p0")])
        assert g.num_edges == 1
        assert g2.num_edges == 2
        assert g2.has_edge("u1", "p0")
        assert g2.weights[-1] == pytest.approx(1.0)

    def test_with_added_edges_rejects_existing(self, star_graph):
        with pytest.raises(DuplicateEdgeError):
            with_added_edges(star_graph, [("u0", "p0")])

    def test_unweighted(self, three_cycles_graph):
        g = unweighted(three_cycles_graph)
        assert np.all(g.weights == 1.0)
        assert g.total_volume == pytest.approx(2 * three_cycles_graph.num_edges)

    def test_relabel_users_keeps_structure(self, three_cycles_graph):
        g = relabel_users(three_cycles_graph, {"a0": "z0"})
        assert g.user_ids[0] == "z0"
        assert g.degree("z0") == pytest.approx(three_cycles_graph.degree("a0"))
        with pytest.raises(GraphError):
            relabel_users(three_cycles_graph, {"a0": "a1"})

    def test_user_posts_index(self, star_graph):
        assert star_graph.user_posts[0] == frozenset({0, 1, 2})
        assert REAL == 0 and FAKE == 1
        assert math.isclose(star_graph.degrees.sum(), 6.0)
