"""Measures, histograms, couplings and feature costs."""

from __future__ import annotations

from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from fgwkit.core.exceptions import (
    AsymmetricStructureError,
    DimensionMismatchError,
    MarginalMismatchError,
    MixedFeatureModesError,
    NegativeStructureEntryError,
    NonPositiveWeightError,
    ValidationError,
)
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import MARGINAL_TOL, Coupling, FeatureMode, Histogram, StructuredMeasure

SYMMETRY_TOL = 1e-12


class FeatureMetric(str, Enum):
    """Ground distance between node features."""

    EUCLIDEAN = "euclidean"
    WL_HAMMING = "wl_hamming"


def make_histogram(weights: ArrayLike) -> Histogram:
    """Normalize strictly positive weights onto the simplex."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise DimensionMismatchError("Histogram needs at least one bin.")
    if not np.all(np.isfinite(w)):
        raise NonPositiveWeightError("Weights must be finite.")
    if (w <= 0).any():
        bad = int(np.flatnonzero(w <= 0)[0])
        raise NonPositiveWeightError(f"Weight {bad} is {w[bad]!r}; every weight must be > 0.")
    return Histogram(weights=frozen_array(w / w.sum()))


def uniform_histogram(n: int) -> Histogram:
    """Uniform weights 1/n."""
    if n < 1:
        raise DimensionMismatchError("Histogram needs at least one bin.")
    return Histogram(weights=frozen_array(np.full(n, 1.0 / n)))


def build_measure(
    weights: ArrayLike | None,
    features: ArrayLike,
    structure: ArrayLike,
    feature_mode: FeatureMode | str = FeatureMode.EUCLIDEAN,
    name: str = "",
) -> StructuredMeasure:
    """Validate raw arrays and assemble a StructuredMeasure.

    Missing weights default to uniform; given weights are renormalized.
    Features may be an n-vector (one scalar per node) or an n x d matrix;
    in WL mode they are integer label sequences.
    """
    mode = FeatureMode(feature_mode)
    C = np.asarray(structure, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionMismatchError(f"Structure must be square, got shape {C.shape}.")
    n = C.shape[0]
    if n == 0:
        raise DimensionMismatchError("Structure must have at least one node.")
    if not np.all(np.isfinite(C)):
        raise ValidationError("Structure entries must be finite.")
    if np.abs(C - C.T).max() > SYMMETRY_TOL:
        raise AsymmetricStructureError("Structure matrix is not symmetric.")
    if (C < 0).any():
        raise NegativeStructureEntryError("Structure matrix has negative entries.")
    if np.abs(np.diag(C)).max() != 0.0:
        raise ValidationError("Structure matrix must have a zero diagonal.")
    C = (C + C.T) / 2.0

    dtype: Any = np.int64 if mode is FeatureMode.WL else np.float64
    F = np.asarray(features, dtype=dtype)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    if F.ndim != 2 or F.shape[0] != n:
        raise DimensionMismatchError(f"Features have {F.shape[0] if F.ndim else 0} rows, structure has {n} nodes.")
    if mode is FeatureMode.EUCLIDEAN and not np.all(np.isfinite(F)):
        raise ValidationError("Features must be finite.")

    h = uniform_histogram(n) if weights is None else make_histogram(weights)
    if h.size != n:
        raise DimensionMismatchError(f"Got {h.size} weights for {n} nodes.")

    return StructuredMeasure(
        h=h,
        features=frozen_array(F, dtype=dtype),
        feature_mode=mode,
        structure=frozen_array(C),
        name=name,
    )


def product_coupling(h: Histogram, g: Histogram) -> Coupling:
    """The independent coupling h g^T, always feasible."""
    return Coupling(matrix=frozen_array(np.outer(h.weights, g.weights)))


def make_coupling(matrix: ArrayLike, h: Histogram, g: Histogram, tol: float = MARGINAL_TOL) -> Coupling:
    """Wrap a matrix as a Coupling after checking it lies in the transport polytope."""
    P = np.asarray(matrix, dtype=np.float64)
    if P.shape != (h.size, g.size):
        raise DimensionMismatchError(f"Coupling shape {P.shape} does not match ({h.size}, {g.size}).")
    coupling = Coupling(matrix=frozen_array(P))
    if not coupling.is_feasible(h.weights, g.weights, tol):
        raise MarginalMismatchError("Coupling marginals do not match the histograms.")
    return coupling


def check_coupling(pi: Coupling, h: Histogram, g: Histogram, tol: float = MARGINAL_TOL) -> None:
    """Raise MarginalMismatchError unless pi lies in Pi(h, g)."""
    if not pi.is_feasible(h.weights, g.weights, tol):
        raise MarginalMismatchError(f"Coupling of shape {pi.shape} is not feasible for the given histograms.")


def feature_cost_matrix(
    a: StructuredMeasure,
    b: StructuredMeasure,
    metric: FeatureMetric | str | None = None,
) -> NDArray[np.float64]:
    """Pairwise feature distances M_AB between the nodes of two measures.

    Euclidean mode returns the l2 distance; WL mode counts the WL
    iterations at which the two label sequences differ.
    """
    if a.feature_mode is not b.feature_mode:
        raise MixedFeatureModesError(f"Cannot compare {a.feature_mode.value} features with {b.feature_mode.value}.")
    if metric is None:
        metric = FeatureMetric.WL_HAMMING if a.feature_mode is FeatureMode.WL else FeatureMetric.EUCLIDEAN
    metric = FeatureMetric(metric)
    expected = FeatureMetric.WL_HAMMING if a.feature_mode is FeatureMode.WL else FeatureMetric.EUCLIDEAN
    if metric is not expected:
        raise MixedFeatureModesError(f"Metric {metric.value} does not apply to {a.feature_mode.value} features.")
    if a.feature_dim != b.feature_dim:
        raise DimensionMismatchError(f"Feature dimensions differ: {a.feature_dim} vs {b.feature_dim}.")

    if metric is FeatureMetric.EUCLIDEAN:
        return cdist(a.features, b.features, metric="euclidean")
    mismatches = a.features[:, None, :] != b.features[None, :, :]
    return mismatches.sum(axis=2).astype(np.float64)
