"""Histogram, StructuredMeasure and Coupling models."""

from __future__ import annotations

from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import NDArray

from fgwkit.models.base import Array, FgwModel, frozen_array

MARGINAL_TOL = 1e-9


class FeatureMode(str, Enum):
    """How node features are stored and compared."""

    EUCLIDEAN = "euclidean"  # n x d float vectors, compared with the l2 norm
    WL = "wl"  # n x (H+1) integer label sequences, compared with a Hamming count


class Histogram(FgwModel):
    """Strictly positive weights summing to one."""

    weights: Array

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def __len__(self) -> int:
        return self.size


class StructuredMeasure(FgwModel):
    """A graph seen as a discrete probability measure over feature x structure.

    ``features`` rows are node features (float vectors or WL label
    sequences, see ``feature_mode``); ``structure`` is the symmetric
    node-to-node similarity matrix C with zero diagonal.
    """

    h: Histogram
    features: Array
    feature_mode: FeatureMode = FeatureMode.EUCLIDEAN
    structure: Array
    name: str = ""

    @property
    def size(self) -> int:
        return self.h.size

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])


class Coupling(FgwModel):
    """A transport plan: nonnegative n x m matrix with prescribed marginals."""

    matrix: Array

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.matrix.shape[0]), int(self.matrix.shape[1]))

    @property
    def row_marginal(self) -> NDArray[np.float64]:
        return self.matrix.sum(axis=1)

    @property
    def col_marginal(self) -> NDArray[np.float64]:
        return self.matrix.sum(axis=0)

    @property
    def T(self) -> Coupling:  # noqa: N802
        return Coupling(matrix=frozen_array(self.matrix.T))

    def is_feasible(self, h: NDArray[np.float64], g: NDArray[np.float64], tol: float = MARGINAL_TOL) -> bool:
        """True when entries are nonnegative and both marginals match within tol."""
        if self.matrix.shape != (h.shape[0], g.shape[0]):
            return False
        if (self.matrix < 0).any():
            return False
        return bool(
            np.abs(self.row_marginal - h).max(initial=0.0) <= tol
            and np.abs(self.col_marginal - g).max(initial=0.0) <= tol
        )
