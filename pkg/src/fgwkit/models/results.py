"""Solver outputs and learning results."""

from __future__ import annotations

from pydantic import Field

from fgwkit.models.base import Array, FgwModel
from fgwkit.models.measure import Coupling, Histogram, StructuredMeasure
from fgwkit.models.params import FgwParams


class OtSolution(FgwModel):
    """Optimal vertex of the transport polytope and its dual potentials."""

    coupling: Coupling
    objective: float
    dual_row: Array
    dual_col: Array


class FgwResult(FgwModel):
    """Outcome of one conditional-gradient solve."""

    coupling: Coupling
    loss: float
    iterations: int
    loss_trace: tuple[float, ...]
    converged: bool
    start: str = "product"


class FgwTerms(FgwModel):
    """Split of an FGW loss into its feature and structure parts."""

    loss: float
    feature_term: float
    structure_term: float
    wasserstein: float


class BarycenterProblem(FgwModel):
    """Weighted FGW barycenter of a set of measures (q = 2)."""

    inputs: tuple[StructuredMeasure, ...]
    lambdas: tuple[float, ...]
    n_nodes: int
    h: Histogram
    alpha: float
    outer_iters: int = 30
    rel_tol: float = 1e-7
    inner: FgwParams
    fix_features: bool = False
    fix_structure: bool = False
    warm_start: bool = False


class BarycenterState(FgwModel):
    """Barycenter candidate: structure C, features A, and one coupling per input."""

    structure: Array
    features: Array
    couplings: tuple[Coupling, ...]
    objective: float
    objective_trace: tuple[float, ...] = ()
    iterations: int = 0


class DistanceMatrix(FgwModel):
    """Symmetric matrix of pairwise FGW losses."""

    values: Array
    alpha: float
    q: int
    starts: tuple[str, ...]
    names: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


class ClusteringResult(FgwModel):
    """Outcome of FGW k-means."""

    assignments: tuple[int, ...]
    centroids: tuple[BarycenterState, ...]
    centroid_histograms: tuple[Histogram, ...]
    inertia_trace: tuple[float, ...]
    adjacency: tuple[Array, ...]
    iterations: int
    converged: bool
    seeds: tuple[int, ...] = Field(default=())


class SweepPoint(FgwModel):
    """FGW between one pair of measures at a single alpha."""

    alpha: float
    loss: float
    feature_term: float
    structure_term: float
    iterations: int
    start: str
