"""Tests for the FGW loss, its gradient, the line search and the CG solver."""

import numpy as np
import pytest

from fgwkit.core.exceptions import MarginalMismatchError, UnsupportedExponentError
from fgwkit.models.params import make_params
from fgwkit.services.fgw_solver import (
    compose_couplings,
    fgw_gradient,
    fgw_loss,
    fgw_terms,
    line_search,
    line_search_q2,
    solve_fgw,
    tensor_product_naive,
    tensor_product_q2,
)
from fgwkit.services.generators import gen_reference_trees
from fgwkit.services.graphs import permute_graph, random_connected_graph, shortest_path_matrix
from fgwkit.services.lp_transport import solve_exact_ot
from fgwkit.services.measures import build_measure, feature_cost_matrix, make_histogram, product_coupling


def _random_problem(seed, n=5, m=4):
    rng = np.random.default_rng(seed)
    C1 = shortest_path_matrix(random_connected_graph(n, rng))
    C2 = shortest_path_matrix(random_connected_graph(m, rng))
    M = rng.uniform(0, 3, size=(n, m))
    P = rng.uniform(0.1, 1.0, size=(n, m))
    P /= P.sum()
    return C1, C2, M, P


def _segment_targets(C1, C2, M, P, q, alpha):
    """A vertex of the polytope with the same marginals as P, from one gradient step."""
    h, g = P.sum(axis=1), P.sum(axis=0)
    grad = fgw_gradient(M, C1, C2, P, q, alpha)
    return solve_exact_ot(grad, make_histogram(h), make_histogram(g)).coupling.matrix


def _tree_measures():
    tree_a, tree_b, iso = gen_reference_trees()
    mu = build_measure(None, tree_a.attributes, shortest_path_matrix(tree_a), name="a")
    nu = build_measure(None, tree_b.attributes, shortest_path_matrix(tree_b), name="b")
    start = np.zeros((mu.size, nu.size))
    start[np.arange(mu.size), iso] = 1.0 / mu.size
    return mu, nu, start


class TestTensorProduct:
    @pytest.mark.parametrize("seed", range(10))
    def test_fast_matches_naive(self, seed):
        C1, C2, _, P = _random_problem(seed, n=3 + seed % 5, m=2 + seed % 7)
        fast, naive = tensor_product_q2(C1, C2, P), tensor_product_naive(C1, C2, P, 2)
        np.testing.assert_allclose(fast, naive, rtol=0, atol=1e-10)

    def test_naive_q1_by_hand(self):
        C1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        C2 = np.array([[0.0, 3.0], [3.0, 0.0]])
        P = np.full((2, 2), 0.25)
        # each row/column mixes |0-0|, |0-3|, |1-0|, |1-3| once
        np.testing.assert_allclose(tensor_product_naive(C1, C2, P, 1), np.full((2, 2), 1.5))


class TestLossAndGradient:
    def test_alpha_zero_is_linear_cost(self):
        C1, C2, M, P = _random_problem(0)
        assert fgw_loss(M, C1, C2, P, 2, 0.0) == pytest.approx(float(np.sum(M**2 * P)))

    def test_alpha_one_ignores_features(self):
        C1, C2, M, P = _random_problem(1)
        assert fgw_loss(M, C1, C2, P, 1, 1.0) == pytest.approx(fgw_loss(None, C1, C2, P, 1, 1.0))

    def test_unsupported_exponent(self):
        C1, C2, M, P = _random_problem(2)
        with pytest.raises(UnsupportedExponentError):
            fgw_loss(M, C1, C2, P, 3, 0.5)

    @pytest.mark.parametrize("q", [1, 2])
    def test_gradient_matches_finite_differences(self, q):
        C1, C2, M, P = _random_problem(4)
        alpha, eps = 0.4, 1e-6
        grad = fgw_gradient(M, C1, C2, P, q, alpha)
        for i, j in [(0, 0), (2, 1), (4, 3)]:
            E = np.zeros_like(P)
            E[i, j] = eps
            numeric = (fgw_loss(M, C1, C2, P + E, q, alpha) - fgw_loss(M, C1, C2, P - E, q, alpha)) / (2 * eps)
            assert numeric == pytest.approx(grad[i, j], rel=1e-5, abs=1e-7)

    @pytest.mark.parametrize("q", [1, 2])
    def test_gradient_along_marginal_preserving_directions(self, q):
        C1, C2, M, P = _random_problem(7, n=6, m=5)
        alpha, eps = 0.6, 1e-6
        grad = fgw_gradient(M, C1, C2, P, q, alpha)
        rng = np.random.default_rng(17)
        for _ in range(20):
            R = rng.normal(size=P.shape)
            D = R - R.mean(axis=1, keepdims=True) - R.mean(axis=0, keepdims=True) + R.mean()
            np.testing.assert_allclose(D.sum(axis=0), 0.0, atol=1e-12)
            np.testing.assert_allclose(D.sum(axis=1), 0.0, atol=1e-12)
            numeric = (fgw_loss(M, C1, C2, P + eps * D, q, alpha)
                       - fgw_loss(M, C1, C2, P - eps * D, q, alpha)) / (2 * eps)
            assert numeric == pytest.approx(float(np.sum(grad * D)), rel=1e-5, abs=1e-7)


class TestLineSearch:
    @pytest.mark.parametrize("q", [1, 2])
    @pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
    def test_coefficients_match_segment(self, q, alpha):
        C1, C2, M, P = _random_problem(5)
        T = _segment_targets(C1, C2, M, P, q, alpha)
        _, (a, b, c) = line_search(M, C1, C2, P, T, q, alpha)
        for t in (0.0, 0.25, 0.5, 1.0):
            expected = fgw_loss(M, C1, C2, P + t * (T - P), q, alpha)
            assert a * t**2 + b * t + c == pytest.approx(expected, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_step_beats_grid(self, seed):
        C1, C2, M, P = _random_problem(seed)
        T = _segment_targets(C1, C2, M, P, 2, 0.6)
        tau, (a, b, c) = line_search_q2(M, C1, C2, P, T, 0.6)
        assert 0.0 <= tau <= 1.0
        best = a * tau**2 + b * tau + c
        grid = min(fgw_loss(M, C1, C2, P + t * (T - P), 2, 0.6) for t in np.linspace(0, 1, 1001))
        assert best <= grid + 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_coefficients_reach_the_target(self, seed):
        C1, C2, M, P = _random_problem(seed)
        T = _segment_targets(C1, C2, M, P, 2, 0.6)
        _, (a, b, c) = line_search_q2(M, C1, C2, P, T, 0.6)
        assert a + b + c == pytest.approx(fgw_loss(M, C1, C2, T, 2, 0.6), rel=1e-10, abs=1e-12)

    def test_rejects_different_marginals(self):
        C1, C2, M, P = _random_problem(6)
        with pytest.raises(MarginalMismatchError):
            line_search_q2(M, C1, C2, P, np.roll(P, 1, axis=0), 0.5)


class TestSolveFgw:
    def test_identical_measures(self, make_measure):
        mu = make_measure(np.random.default_rng(0), 8, d=2)
        params = make_params(0.5, starts=["product", "wasserstein"])
        assert solve_fgw(mu, mu, params).loss <= 1e-9

    @pytest.mark.parametrize("seed", range(20))
    def test_alpha_zero_is_wasserstein(self, make_measure, seed):
        rng = np.random.default_rng(seed)
        mu, nu = make_measure(rng, int(rng.integers(2, 16)), d=2), make_measure(rng, int(rng.integers(2, 16)), d=2)
        M = feature_cost_matrix(mu, nu)
        for q in (1, 2):
            result = solve_fgw(mu, nu, make_params(0.0, q=q))
            assert result.loss == pytest.approx(solve_exact_ot(M**q, mu.h, nu.h).objective, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_alpha_one_is_structure_only(self, make_measure, seed):
        rng = np.random.default_rng(seed)
        mu, nu = make_measure(rng, int(rng.integers(2, 16))), make_measure(rng, int(rng.integers(2, 16)))
        params = make_params(1.0, starts=["product"])
        result = solve_fgw(mu, nu, params)
        expected = fgw_loss(None, mu.structure, nu.structure, result.coupling, 2, 1.0)
        assert result.loss == pytest.approx(expected, rel=1e-10, abs=1e-12)
        relabeled = build_measure(None, rng.normal(size=(nu.size, 3)), nu.structure)
        assert solve_fgw(mu, relabeled, params).loss == pytest.approx(result.loss, rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_is_non_increasing(self, make_measure, seed):
        rng = np.random.default_rng(100 + seed)
        mu, nu = make_measure(rng, 9, d=2), make_measure(rng, 6, d=2)
        result = solve_fgw(mu, nu, make_params(0.5, starts=["product", "gw"]))
        trace = np.array(result.loss_trace)
        assert (np.diff(trace) <= 1e-12).all()
        assert result.coupling.is_feasible(mu.h.weights, nu.h.weights)

    @pytest.mark.parametrize("q", [1, 2])
    def test_bounded_by_wasserstein_and_product(self, make_measure, q):
        rng = np.random.default_rng(42)
        mu, nu = make_measure(rng, 6), make_measure(rng, 8)
        alpha = 0.5
        result = solve_fgw(mu, nu, make_params(alpha, q=q))
        terms = fgw_terms(mu, nu, result.coupling, q, alpha)
        M = feature_cost_matrix(mu, nu)
        at_product = fgw_loss(M, mu.structure, nu.structure, product_coupling(mu.h, nu.h), q, alpha)
        assert result.loss >= (1 - alpha) * terms.wasserstein - 1e-12
        assert result.loss <= at_product + 1e-12
        assert terms.loss == pytest.approx(result.loss, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_interpolation_bounds(self, make_measure, alpha):
        rng = np.random.default_rng(int(alpha * 100))
        params = make_params(alpha, starts=["product", "wasserstein"])
        for _ in range(50):
            mu = make_measure(rng, int(rng.integers(4, 9)), d=2)
            nu = make_measure(rng, int(rng.integers(4, 9)), d=2)
            M2 = feature_cost_matrix(mu, nu) ** 2
            exact = solve_exact_ot(M2, mu.h, nu.h)
            at_exact = fgw_loss(None, mu.structure, nu.structure, exact.coupling, 2, 1.0)
            loss = solve_fgw(mu, nu, params).loss
            assert loss >= (1 - alpha) * exact.objective - 1e-9
            assert loss <= (1 - alpha) * exact.objective + alpha * at_exact + 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_argument_order_does_not_matter(self, make_measure, seed):
        rng = np.random.default_rng(300 + seed)
        mu, nu = make_measure(rng, int(rng.integers(4, 8)), d=2), make_measure(rng, int(rng.integers(4, 8)), d=2)
        params = make_params(0.5, rel_tol=1e-13, starts=["product", "wasserstein"])
        forward = solve_fgw(mu, nu, params)
        backward = solve_fgw(nu, mu, params)
        assert backward.loss == pytest.approx(forward.loss, abs=1e-9)
        # the objective itself is symmetric under transposition
        M = feature_cost_matrix(mu, nu)
        flipped = fgw_loss(M.T, nu.structure, mu.structure, forward.coupling.matrix.T, 2, 0.5)
        assert flipped == pytest.approx(forward.loss, rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("seed", range(20))
    def test_permuted_copy_is_at_distance_zero(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 13))
        g = random_connected_graph(n, rng, extra_edge_prob=0.2)
        g = g.model_copy(update={"attributes": rng.normal(size=(n, 2))})
        moved = permute_graph(g, rng.permutation(n).tolist())
        mu = build_measure(None, g.attributes, shortest_path_matrix(g))
        nu = build_measure(None, moved.attributes, shortest_path_matrix(moved))
        result = solve_fgw(mu, nu, make_params(0.5, starts=["wasserstein"]))
        assert result.loss <= 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_relabeling_the_target_keeps_the_loss(self, make_measure, seed):
        rng = np.random.default_rng(400 + seed)
        mu = make_measure(rng, 6, d=2)
        g = random_connected_graph(7, rng, extra_edge_prob=0.2)
        g = g.model_copy(update={"attributes": rng.normal(size=(7, 2))})
        sigma = rng.permutation(7).tolist()
        moved = permute_graph(g, sigma)
        nu = build_measure(None, g.attributes, shortest_path_matrix(g))
        nu_moved = build_measure(None, moved.attributes, shortest_path_matrix(moved))
        params = make_params(0.5, rel_tol=1e-13, starts=["product"])
        assert solve_fgw(mu, nu_moved, params).loss == pytest.approx(solve_fgw(mu, nu, params).loss, abs=1e-9)


class TestReferenceTrees:
    def test_wasserstein_limit_is_zero(self):
        mu, nu, _ = _tree_measures()
        assert solve_fgw(mu, nu, make_params(0.0, q=1)).loss <= 1e-9

    def test_structure_limit_is_zero_from_isomorphism(self):
        mu, nu, start = _tree_measures()
        assert solve_fgw(mu, nu, make_params(1.0, starts=[start])).loss <= 1e-9

    def test_fused_distance_is_positive(self):
        mu, nu, start = _tree_measures()
        params = make_params(0.5, starts=["product", "wasserstein", "gw", start])
        assert solve_fgw(mu, nu, params).loss > 1e-3


class TestComposeCouplings:
    def test_glued_coupling_has_outer_marginals(self, make_measure):
        rng = np.random.default_rng(3)
        a, b, c = make_measure(rng, 5), make_measure(rng, 6), make_measure(rng, 4)
        params = make_params(0.5)
        P = solve_fgw(a, b, params).coupling
        Q = solve_fgw(b, c, params).coupling
        S = compose_couplings(P, Q)
        assert S.is_feasible(a.h.weights, c.h.weights)

    def test_permutations_compose(self):
        n = 4
        P = np.eye(n)[[1, 2, 3, 0]] / n
        Q = np.eye(n)[[3, 0, 1, 2]] / n
        np.testing.assert_allclose(compose_couplings(P, Q).matrix, np.eye(n) / n, atol=1e-15)

    def test_identity_on_the_middle_space(self):
        rng = np.random.default_rng(8)
        P = rng.uniform(0.1, 1.0, size=(4, 3))
        P /= P.sum()
        S = compose_couplings(P, np.diag(P.sum(axis=0)))
        np.testing.assert_allclose(S.matrix, P, atol=1e-15)

    def test_products_compose_to_a_product(self):
        h = make_histogram([1.0, 2.0, 3.0])
        g = make_histogram([2.0, 1.0])
        f = make_histogram([1.0, 1.0, 1.0, 5.0])
        S = compose_couplings(product_coupling(h, g), product_coupling(g, f))
        np.testing.assert_allclose(S.matrix, np.outer(h.weights, f.weights), atol=1e-15)

    def test_random_couplings_keep_outer_marginals(self):
        rng = np.random.default_rng(10)
        h = make_histogram(rng.uniform(0.5, 2.0, size=4))
        g = make_histogram(rng.uniform(0.5, 2.0, size=3))
        f = make_histogram(rng.uniform(0.5, 2.0, size=5))
        P = solve_exact_ot(rng.normal(size=(4, 3)), h, g).coupling
        Q = solve_exact_ot(rng.normal(size=(3, 5)), g, f).coupling
        S = compose_couplings(P, Q)
        np.testing.assert_allclose(S.row_marginal, h.weights, atol=1e-10)
        np.testing.assert_allclose(S.col_marginal, f.weights, atol=1e-10)

    def test_mismatched_middle_marginals(self):
        h = make_histogram([1.0, 1.0])
        with pytest.raises(MarginalMismatchError):
            compose_couplings(product_coupling(h, make_histogram([1.0, 3.0])), product_coupling(h, h))

    @pytest.mark.parametrize(("q", "factor"), [(1, 1.0), (2, 2.0)])
    def test_gluing_inequality(self, make_measure, q, factor):
        rng = np.random.default_rng(200 + q)
        params = make_params(0.5, q=q, starts=["product", "wasserstein", "gw"])
        for _ in range(30):
            a, b, c = (make_measure(rng, int(rng.integers(3, 7)), d=2) for _ in range(3))
            ab = solve_fgw(a, b, params)
            bc = solve_fgw(b, c, params)
            glued = compose_couplings(ab.coupling, bc.coupling)
            at_glued = fgw_loss(feature_cost_matrix(a, c), a.structure, c.structure, glued, q, 0.5)
            assert at_glued <= factor * (ab.loss + bc.loss) + 1e-9
