"""
Tests for the greedy tree optimizer and the exhaustive oracle.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selab.core.exceptions import EmptyGraphError, EntropyError
from selab.entropy.encoding_tree import EncodingTree
from selab.entropy.measures import one_dim_entropy, tree_entropy
from selab.entropy.optimizer import optimize_tree
from selab.entropy.oracle import _adjacency, entropy_oracle, oracle_gap, partition_entropy

from factories import bridged_cycles, cycle_blocks, make_graph, random_graph


class TestOptimizeTree:
    """Greedy stretch / merge / compress"""

    def test_height_below_two_rejected(self, star_graph):
        with pytest.raises(EntropyError):
            optimize_tree(star_graph, 1)

    def test_edgeless_graph_rejected(self):
        with pytest.raises(EmptyGraphError):
            optimize_tree(make_graph(["u0"], ["p0"], []), 2)

    def test_recovers_planted_cycles(self, three_cycles_graph):
        t = optimize_tree(three_cycles_graph, 2, validate_steps=True)
        communities = {
            frozenset(three_cycles_graph.vertex_id(v) for v in t.leaves_under(child)) for child in t.root.children
        }
        assert communities == cycle_blocks("abc")
        assert all(t.depth(t.leaf_of(v)) == 2 for v in range(three_cycles_graph.num_vertices))
        assert tree_entropy(three_cycles_graph, t) < one_dim_entropy(three_cycles_graph)

    def test_recovers_planted_stars(self, two_stars_graph):
        t = optimize_tree(two_stars_graph, 2)
        communities = {
            frozenset(two_stars_graph.vertex_id(v) for v in t.leaves_under(child)) for child in t.root.children
        }
        assert communities == {frozenset({"ua", "pa0", "pa1", "pa2"}), frozenset({"ub", "pb0", "pb1", "pb2"})}

    def test_deterministic(self, three_cycles_graph):
        first = optimize_tree(three_cycles_graph, 3)
        second = optimize_tree(three_cycles_graph, 3)
        assert first.to_dict() == second.to_dict()

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_tiny_synthetic_respects_height(self, tiny_graph, K):
        t = optimize_tree(tiny_graph, K)
        t.validate(tiny_graph)
        assert t.height == K
        assert t.max_depth <= K
        assert tree_entropy(tiny_graph, t) <= one_dim_entropy(tiny_graph) + 1e-9

    @given(st.integers(min_value=0, max_value=100_000), st.sampled_from([2, 3]))
    @settings(max_examples=60, deadline=None)
    def test_never_worse_than_single_layer(self, seed, K):
        g = random_graph(np.random.default_rng(seed), max_side=6)
        t = optimize_tree(g, K, validate_steps=True)
        single = tree_entropy(g, EncodingTree.single_layer(g))
        assert tree_entropy(g, t) <= single + 1e-9
        assert t.max_depth <= K


class TestOracle:
    """Exhaustive partition search on tiny graphs"""

    def test_singletons_and_whole_set_equal_single_layer(self, two_stars_graph):
        adj = _adjacency(two_stars_graph)
        n = two_stars_graph.num_vertices
        expected = one_dim_entropy(two_stars_graph)
        assert partition_entropy(adj, [[v] for v in range(n)]) == pytest.approx(expected, abs=1e-12)
        assert partition_entropy(adj, [list(range(n))]) == pytest.approx(expected, abs=1e-12)

    def test_two_stars_optimum(self, two_stars_graph):
        result = entropy_oracle(two_stars_graph)
        assert {frozenset(b) for b in result.partition} == {
            frozenset({"ua", "pa0", "pa1", "pa2"}),
            frozenset({"ub", "pb0", "pb1", "pb2"}),
        }
        assert result.partitions_checked == 4140
        greedy = optimize_tree(two_stars_graph, 2)
        assert tree_entropy(two_stars_graph, greedy) == pytest.approx(result.min_entropy, abs=1e-12)

    def test_single_cycle_pair_split_ties(self):
        # a 4-cycle block and its two matched edges score the same; only the bridge separates them
        g = bridged_cycles("ab")
        adj = _adjacency(g)
        index = {v: g.vertex_index(v) for v in g.vertex_ids}
        cycles = [[index[v] for v in block] for block in cycle_blocks("ab")]
        pairs = [[index[u], index[p]] for u, p in [("a0", "pa0"), ("a1", "pa1"), ("b0", "pb0"), ("b1", "pb1")]]
        assert partition_entropy(adj, cycles) == pytest.approx(partition_entropy(adj, pairs), abs=1e-5)

    def test_too_many_vertices(self):
        users = [f"u{i}" for i in range(5)]
        posts = [f"p{j}" for j in range(4)]
        g = make_graph(users, posts, [(u, "p0", 1.0) for u in users] + [("u0", p, 1.0) for p in posts[1:]])
        with pytest.raises(EntropyError, match="limited"):
            entropy_oracle(g)

    @pytest.mark.timeout(300)
    def test_greedy_sits_between_optimum_and_single_layer(self):
        rng = np.random.default_rng(2024)
        gaps = []
        for _ in range(50):
            gap = oracle_gap(random_graph(rng))
            assert gap.optimum <= gap.greedy + 1e-9
            assert gap.greedy <= gap.single_layer + 1e-9
            gaps.append(gap.relative_gap)
        assert float(np.mean(gaps)) < 0.05
