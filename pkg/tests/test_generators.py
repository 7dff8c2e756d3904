"""Tests for the reference trees and the SBM generators."""

import numpy as np
import pytest

from fgwkit.core.exceptions import ConnectivityRetriesExceededError, SpecInvalidError
from fgwkit.models.graph import SbmSpec
from fgwkit.services.generators import (
    BLUE,
    INTERNAL,
    RED,
    SBM_NODE_CHOICES,
    community_sizes,
    gen_reference_trees,
    gen_sbm,
    gen_sbm_dataset,
    group_label_means,
)
from fgwkit.services.graphs import is_connected, shortest_path_matrix


def _spec(**overrides):
    values = {"communities": 2, "nodes": 20, "p_in": 0.8, "p_out": 0.05, "label_means": (-1.0, 1.0),
              "label_noise": 0.1, "seed": 3}
    values.update(overrides)
    return SbmSpec(**values)


class TestReferenceTrees:
    def test_shape(self):
        tree_a, tree_b, iso = gen_reference_trees()
        assert tree_a.node_count == tree_b.node_count == 15
        assert len(tree_a.edges) == 14
        assert tree_a.edges == tree_b.edges
        assert iso == list(range(15))

    def test_same_feature_multiset(self):
        tree_a, tree_b, _ = gen_reference_trees()
        assert sorted(tree_a.attributes.ravel()) == sorted(tree_b.attributes.ravel())

    def test_leaf_arrangement(self):
        tree_a, tree_b, _ = gen_reference_trees()
        assert list(tree_a.attributes.ravel()[7:]) == [BLUE, BLUE, RED, RED, BLUE, BLUE, RED, RED]
        assert list(tree_b.attributes.ravel()[7:]) == [BLUE, RED] * 4
        assert set(tree_a.attributes.ravel()[:7]) == {INTERNAL}

    def test_depth(self):
        tree_a, _, _ = gen_reference_trees()
        assert shortest_path_matrix(tree_a).max() == 6


class TestSbm:
    def test_deterministic(self):
        a, b = gen_sbm(_spec()), gen_sbm(_spec())
        assert a.edges == b.edges
        np.testing.assert_array_equal(a.attributes, b.attributes)

    def test_connected_with_noisy_means(self):
        g = gen_sbm(_spec())
        assert is_connected(g)
        values = g.attributes.ravel()
        assert (np.abs(values[:10] + 1.0) <= 0.1).all()
        assert (np.abs(values[10:] - 1.0) <= 0.1).all()

    @pytest.mark.parametrize("seed", range(20))
    def test_blocks_are_denser_inside(self, seed):
        g = gen_sbm(_spec(nodes=30, p_in=0.9, p_out=0.05, seed=seed))
        block = np.repeat([0, 1], 15)
        inside = sum(1 for u, v in g.edges if block[u] == block[v])
        across = len(g.edges) - inside
        assert inside / (2 * 15 * 14 / 2) > across / (15 * 15)

    def test_single_full_community_is_complete(self):
        g = gen_sbm(_spec(communities=1, nodes=6, p_in=1.0, p_out=0.0, label_means=(0.0,)))
        assert len(g.edges) == 15
        np.testing.assert_array_equal(shortest_path_matrix(g), np.ones((6, 6)) - np.eye(6))

    def test_isolated_communities_exhaust_retries(self):
        with pytest.raises(ConnectivityRetriesExceededError):
            gen_sbm(_spec(p_out=0.0))

    @pytest.mark.parametrize("overrides", [
        {"communities": 0, "label_means": ()},
        {"nodes": 1},
        {"p_in": 0.05, "p_out": 0.8},
        {"label_means": (1.0,)},
        {"label_noise": -1.0},
    ])
    def test_invalid_specs(self, overrides):
        with pytest.raises(SpecInvalidError):
            gen_sbm(_spec(**overrides))

    def test_community_sizes(self):
        assert community_sizes(10, 3) == [4, 3, 3]

    def test_group_label_means(self):
        assert group_label_means(3) == (3.0, -3.0, 3.0)


class TestSbmDataset:
    def test_default_layout(self):
        graphs = gen_sbm_dataset(groups=2, per_group=3, seed=1)
        assert [g.graph_label for g in graphs] == [0, 0, 0, 1, 1, 1]
        assert graphs[0].name == "sbm_g0_00"
        assert all(g.node_count in SBM_NODE_CHOICES for g in graphs)
        assert all(is_connected(g) for g in graphs)

    def test_explicit_community_counts(self):
        graphs = gen_sbm_dataset(groups=[3], per_group=2, seed=2)
        means = set(np.round(graphs[0].attributes.ravel()))
        assert means == {3.0, -3.0}

    def test_seeded(self):
        a = gen_sbm_dataset(groups=2, per_group=2, seed=5)
        b = gen_sbm_dataset(groups=2, per_group=2, seed=5)
        assert [g.edges for g in a] == [g.edges for g in b]

    def test_rejects_empty(self):
        with pytest.raises(SpecInvalidError):
            gen_sbm_dataset(groups=[], per_group=1)
