"""Tests for graph construction, structure matrices and WL relabeling."""

import numpy as np
import pytest

from fgwkit.core.exceptions import (
    DisconnectedGraphError,
    IndexOutOfRangeError,
    InvalidPermutationError,
    MissingLabelsError,
    ValidationError,
)
from fgwkit.services.graphs import (
    WlDictionary,
    adjacency_matrix,
    check_permutation,
    graph_components,
    is_connected,
    largest_component,
    make_graph,
    normalize_edges,
    permutation_matrix,
    permute_graph,
    random_connected_graph,
    shortest_path_matrix,
    wl_relabel,
    wl_relabel_many,
)


class TestMakeGraph:
    def test_edges_are_undirected_and_sorted(self):
        g = make_graph(3, [(2, 1), (0, 1)])
        assert g.edges == ((0, 1), (1, 2))

    def test_reverse_duplicate_rejected(self):
        with pytest.raises(ValidationError, match="Duplicate"):
            make_graph(2, [(0, 1), (1, 0)])

    def test_self_loop_rejected(self):
        with pytest.raises(ValidationError, match="Self-loop"):
            make_graph(2, [(1, 1)])

    def test_endpoint_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            make_graph(2, [(0, 2)])

    def test_normalize_edges_counts(self):
        edges, stats = normalize_edges([(0, 1), (1, 0), (1, 2), (2, 2), (1, 2)])
        assert edges == [(0, 1), (1, 2)]
        assert stats == {"one_directional_edges": 1, "self_loops_dropped": 1, "duplicate_edges": 1}


class TestStructure:
    def test_path_shortest_paths(self):
        g = make_graph(3, [(0, 1), (1, 2)])
        np.testing.assert_array_equal(shortest_path_matrix(g), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])

    def test_adjacency(self):
        g = make_graph(3, [(0, 2)])
        np.testing.assert_array_equal(adjacency_matrix(g), [[0, 0, 1], [0, 0, 0], [1, 0, 0]])

    def test_disconnected_graph_lists_components(self):
        g = make_graph(5, [(0, 1), (2, 3), (3, 4)])
        with pytest.raises(DisconnectedGraphError) as info:
            shortest_path_matrix(g)
        assert info.value.components == [[2, 3, 4], [0, 1]]

    def test_largest_component(self):
        g = make_graph(5, [(0, 1), (2, 3), (3, 4)], labels=[0, 1, 2, 3, 4])
        sub = largest_component(g)
        assert sub.node_count == 3
        assert sub.labels == (2, 3, 4)
        assert sub.edges == ((0, 1), (1, 2))
        assert is_connected(sub)

    def test_random_connected_graph(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 10):
            assert len(graph_components(random_connected_graph(n, rng))) == 1

    @staticmethod
    def _floyd_warshall(n, edges):
        D = np.full((n, n), np.inf)
        np.fill_diagonal(D, 0.0)
        for u, v in edges:
            D[u, v] = D[v, u] = 1.0
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    if D[i, k] + D[k, j] < D[i, j]:
                        D[i, j] = D[i, k] + D[k, j]
        return D

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_floyd_warshall(self, seed):
        g = random_connected_graph(12, np.random.default_rng(seed), extra_edge_prob=0.2)
        np.testing.assert_array_equal(shortest_path_matrix(g), self._floyd_warshall(12, g.edges))

    @pytest.mark.parametrize("n", [1, 2, 7, 20])
    def test_metric_properties(self, n):
        C = shortest_path_matrix(random_connected_graph(n, np.random.default_rng(n)))
        np.testing.assert_array_equal(C, C.T)
        assert (np.diag(C) == 0).all()
        # C[i, j] <= C[i, k] + C[k, j] for every triple
        assert (C[:, None, :] <= C[:, :, None] + C[None, :, :]).all()

    def test_complete_graph(self):
        g = make_graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
        np.testing.assert_array_equal(shortest_path_matrix(g), np.ones((4, 4)) - np.eye(4))


class TestWeisfeilerLehman:
    def test_path_relabeling(self):
        g = make_graph(3, [(0, 1), (1, 2)], labels=[0, 0, 0])
        seq = wl_relabel(g, 1)
        # ends see one neighbour, the middle sees two
        np.testing.assert_array_equal(seq, [[0, 0], [0, 1], [0, 0]])

    def test_depth_zero_keeps_labels(self):
        g = make_graph(2, [(0, 1)], labels=[4, 7])
        np.testing.assert_array_equal(wl_relabel(g, 0), [[4], [7]])

    def test_shared_dictionary(self):
        a = make_graph(3, [(0, 1), (1, 2)], labels=[1, 2, 1])
        b = make_graph(2, [(0, 1)], labels=[2, 1])
        seq_a, seq_b = wl_relabel_many([a, b], 2)
        # node 0 of b and node 1 of a have different neighbourhoods; node 1 of b matches the ends of a
        assert seq_b[1, 1] == seq_a[0, 1]
        assert seq_b[0, 1] != seq_a[1, 1]

    def test_dictionary_sizes(self):
        d = WlDictionary()
        g = make_graph(3, [(0, 1), (1, 2)], labels=[0, 0, 0])
        wl_relabel(g, 1, d)
        assert d.size(1) == 2
        assert d.size(2) == 0

    def test_missing_labels(self):
        with pytest.raises(MissingLabelsError):
            wl_relabel(make_graph(2, [(0, 1)]), 1)

    def test_triangle_with_one_odd_label(self):
        g = make_graph(3, [(0, 1), (0, 2), (1, 2)], labels=[1, 1, 2])
        seq = wl_relabel(g, 1)
        assert seq[0, 1] == seq[1, 1]
        assert seq[2, 1] != seq[0, 1]

    @pytest.mark.parametrize("seed", range(10))
    def test_refinement_never_merges_classes(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(15, rng, extra_edge_prob=0.15)
        g = make_graph(15, g.edges, labels=rng.integers(0, 3, size=15).tolist())
        seq = wl_relabel(g, 4)
        for k in range(1, 5):
            same_now = seq[:, k][:, None] == seq[:, k][None, :]
            same_before = seq[:, k - 1][:, None] == seq[:, k - 1][None, :]
            assert not (same_now & ~same_before).any()


class TestPermutations:
    def test_check_permutation(self):
        assert check_permutation([2, 0, 1], 3) == [2, 0, 1]
        with pytest.raises(InvalidPermutationError):
            check_permutation([0, 0, 1], 3)
        with pytest.raises(InvalidPermutationError):
            check_permutation([0, 1], 3)

    def test_permutation_matrix_moves_structure(self):
        g = make_graph(3, [(0, 1), (1, 2)])
        sigma = [2, 0, 1]
        P = permutation_matrix(sigma)
        C = shortest_path_matrix(g)
        np.testing.assert_array_equal(P @ C @ P.T, shortest_path_matrix(permute_graph(g, sigma)))

    def test_permute_graph_carries_labels(self):
        g = make_graph(3, [(0, 1)], labels=[5, 6, 7])
        moved = permute_graph(g, [1, 2, 0])
        assert moved.labels == (7, 5, 6)
        assert moved.edges == ((1, 2),)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_permutations_move_structure(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(9, rng, extra_edge_prob=0.3)
        sigma = rng.permutation(9).tolist()
        P = permutation_matrix(sigma)
        C = shortest_path_matrix(g)
        moved = shortest_path_matrix(permute_graph(g, sigma))
        np.testing.assert_array_equal(P @ C @ P.T, moved)
        for i in range(9):
            for j in range(9):
                assert moved[sigma[i], sigma[j]] == C[i, j]
