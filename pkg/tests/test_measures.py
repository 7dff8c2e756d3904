"""Tests for histograms, measures, couplings and feature costs."""

import numpy as np
import pytest

from fgwkit.core.exceptions import (
    AsymmetricStructureError,
    DimensionMismatchError,
    MarginalMismatchError,
    MixedFeatureModesError,
    NegativeStructureEntryError,
    NonPositiveWeightError,
    ValidationError,
)
from fgwkit.models.measure import FeatureMode
from fgwkit.services.measures import (
    build_measure,
    check_coupling,
    feature_cost_matrix,
    make_coupling,
    make_histogram,
    product_coupling,
    uniform_histogram,
)

PATH3 = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]


class TestHistogram:
    def test_normalizes(self):
        h = make_histogram([1, 1, 2])
        np.testing.assert_allclose(h.weights, [0.25, 0.25, 0.5])

    def test_rejects_zero_weight(self):
        with pytest.raises(NonPositiveWeightError):
            make_histogram([1.0, 0.0])

    def test_rejects_empty(self):
        with pytest.raises(DimensionMismatchError):
            make_histogram([])

    def test_uniform(self):
        h = uniform_histogram(4)
        assert h.size == 4
        np.testing.assert_allclose(h.weights, 0.25)

    def test_weights_are_read_only(self):
        h = uniform_histogram(3)
        with pytest.raises(ValueError):
            h.weights[0] = 1.0


class TestBuildMeasure:
    def test_vector_features_are_reshaped(self):
        mu = build_measure(None, [0.0, 1.0, 2.0], PATH3)
        assert mu.features.shape == (3, 1)
        assert mu.feature_mode is FeatureMode.EUCLIDEAN
        np.testing.assert_allclose(mu.h.weights, 1 / 3)

    def test_rejects_asymmetric_structure(self):
        with pytest.raises(AsymmetricStructureError):
            build_measure(None, [0, 0], [[0, 1], [2, 0]])

    def test_rejects_negative_structure(self):
        with pytest.raises(NegativeStructureEntryError):
            build_measure(None, [0, 0], [[0, -1], [-1, 0]])

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValidationError):
            build_measure(None, [0, 0], [[1, 1], [1, 0]])

    def test_rejects_feature_count_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            build_measure(None, [0, 0], PATH3)

    def test_rejects_weight_count_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            build_measure([1, 1], [0, 0, 0], PATH3)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite_features(self, bad):
        with pytest.raises(ValidationError, match="finite"):
            build_measure(None, [[0.0, 1.0], [bad, 2.0], [1.0, 0.0]], PATH3)

    def test_wl_features_are_integers(self):
        mu = build_measure(None, [[1, 4], [2, 5], [1, 4]], PATH3, feature_mode="wl")
        assert mu.features.dtype == np.int64


class TestFeatureCost:
    def test_scalar_euclidean(self):
        a = build_measure(None, [0.0], [[0.0]])
        b = build_measure(None, [3.0], [[0.0]])
        np.testing.assert_allclose(feature_cost_matrix(a, b), [[3.0]])

    def test_vector_euclidean(self):
        a = build_measure(None, [[0.0, 0.0]], [[0.0]])
        b = build_measure(None, [[3.0, 4.0], [0.0, 0.0]], [[0, 1], [1, 0]])
        np.testing.assert_allclose(feature_cost_matrix(a, b), [[5.0, 0.0]])

    def test_wl_hamming_counts_mismatches(self):
        a = build_measure(None, [[1, 2, 3]], [[0]], feature_mode="wl")
        b = build_measure(None, [[1, 5, 3], [7, 8, 9]], [[0, 1], [1, 0]], feature_mode="wl")
        np.testing.assert_allclose(feature_cost_matrix(a, b), [[1.0, 3.0]])

    def test_mixed_modes_rejected(self):
        a = build_measure(None, [1.0], [[0.0]])
        b = build_measure(None, [[1]], [[0]], feature_mode="wl")
        with pytest.raises(MixedFeatureModesError):
            feature_cost_matrix(a, b)

    def test_dimension_mismatch(self):
        a = build_measure(None, [[1.0, 2.0]], [[0.0]])
        b = build_measure(None, [1.0], [[0.0]])
        with pytest.raises(DimensionMismatchError):
            feature_cost_matrix(a, b)


class TestCoupling:
    def test_product_coupling_is_feasible(self):
        h, g = make_histogram([1, 3]), uniform_histogram(3)
        pi = product_coupling(h, g)
        assert pi.shape == (2, 3)
        assert pi.is_feasible(h.weights, g.weights)
        check_coupling(pi, h, g)

    def test_make_coupling_rejects_bad_marginals(self):
        h = uniform_histogram(2)
        with pytest.raises(MarginalMismatchError):
            make_coupling([[0.5, 0.0], [0.5, 0.0]], h, h)

    def test_make_coupling_rejects_bad_shape(self):
        with pytest.raises(DimensionMismatchError):
            make_coupling(np.eye(3) / 3, uniform_histogram(2), uniform_histogram(3))

    def test_transpose(self):
        h, g = make_histogram([1, 3]), uniform_histogram(3)
        pi = product_coupling(h, g).T
        assert pi.shape == (3, 2)
        assert pi.is_feasible(g.weights, h.weights)
