"""k-means over graphs: FGW assignments and barycenter centroids."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics import adjusted_rand_score

from fgwkit.core.exceptions import KTooLargeError, MixedFeatureModesError, ValidationError
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import Coupling, FeatureMode, Histogram, StructuredMeasure
from fgwkit.models.params import FgwParams
from fgwkit.models.results import BarycenterState, ClusteringResult, DistanceMatrix
from fgwkit.services.barycenter import (
    barycenter_measure,
    make_barycenter_problem,
    solve_barycenter,
    threshold_adjacency,
)
from fgwkit.services.distances import map_solves, pairwise_fgw_matrix
from fgwkit.services.measures import uniform_histogram

logger = logging.getLogger(__name__)

INERTIA_SLACK = 1e-6


class _Centroid:
    """Mutable bookkeeping for one cluster between Lloyd steps."""

    def __init__(self, state: BarycenterState, h: Histogram, members: list[int]) -> None:
        self.state = state
        self.h = h
        # graph index -> coupling (centroid x graph) from the last refit
        self.couplings: dict[int, Coupling] = dict(zip(members, state.couplings, strict=True))

    def measure(self) -> StructuredMeasure:
        return barycenter_measure(self.state.structure, self.state.features, self.h, name="centroid")


def farthest_first(D: NDArray[np.float64], k: int, rng: np.random.Generator) -> list[int]:
    """Seeded first pick, then repeatedly the graph farthest from the chosen ones (ties: smallest index)."""
    K = D.shape[0]
    chosen = [int(rng.integers(K))]
    while len(chosen) < k:
        gap = D[:, chosen].min(axis=1)
        gap[chosen] = -np.inf
        chosen.append(int(np.argmax(gap)))
    return chosen


def _fit(
    members: list[StructuredMeasure],
    n_nodes: int,
    h: Histogram,
    params: FgwParams,
    outer_iters: int,
    rel_tol: float,
    init: BarycenterState | None,
    seed: int,
) -> BarycenterState:
    problem = make_barycenter_problem(
        members, n_nodes, params.alpha, h=h, outer_iters=outer_iters, rel_tol=rel_tol,
        inner=params, warm_start=True,
    )
    return solve_barycenter(problem, init=init, seed=seed)


def _fit_task(args: tuple[list[StructuredMeasure], int, Histogram, FgwParams, int, float,
                          BarycenterState | None, int]) -> BarycenterState:
    return _fit(*args)


def _seed_centroid(
    mu: StructuredMeasure, n_nodes: int | None, params: FgwParams, outer_iters: int, rel_tol: float, seed: int,
) -> tuple[BarycenterState, Histogram]:
    """A centroid standing for a single graph: the graph itself when sizes agree."""
    if n_nodes is None or n_nodes == mu.size:
        identity = Coupling(matrix=frozen_array(np.diag(mu.h.weights)))
        state = BarycenterState(
            structure=mu.structure, features=mu.features, couplings=(identity,), objective=0.0,
            objective_trace=(0.0,),
        )
        return state, mu.h
    h = uniform_histogram(n_nodes)
    return _fit([mu], n_nodes, h, params, outer_iters, rel_tol, None, seed), h


def kmeans_graphs(
    measures: Sequence[StructuredMeasure],
    k: int,
    params: FgwParams,
    centroid_nodes: int | None = None,
    threshold: float = 1.1,
    seed: int = 0,
    max_iters: int = 20,
    outer_iters: int = 30,
    bary_rel_tol: float = 1e-7,
    workers: int = 1,
    distances: DistanceMatrix | None = None,
) -> ClusteringResult:
    """Lloyd iterations with FGW assignments and FGW barycenter centroids.

    Iteration 0 assigns every graph to the seed centroids; each following
    iteration refits the centroids from their members (warm-started from
    the assignment couplings) and reassigns. Stops when assignments stop
    changing or after ``max_iters`` refits.
    """
    K = len(measures)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}.")
    if k > K:
        raise KTooLargeError(f"k={k} exceeds the {K} graphs to cluster.")
    if any(m.feature_mode is not FeatureMode.EUCLIDEAN for m in measures):
        raise MixedFeatureModesError("k-means centroids need Euclidean vector features.")
    if params.q != 2:
        raise ValidationError("k-means uses FGW barycenters, which need q = 2.")

    rng = np.random.default_rng(seed)
    D = distances if distances is not None else pairwise_fgw_matrix(measures, params, workers)
    seeds = farthest_first(np.array(D.values), k, rng)
    logger.info("k-means: seeds %s", seeds)

    centroids: list[_Centroid] = []
    for c, s in enumerate(seeds):
        state, h = _seed_centroid(measures[s], centroid_nodes, params, outer_iters, bary_rel_tol, seed + c)
        centroids.append(_Centroid(state, h, [s]))

    assignments, losses = _assign(measures, centroids, params, workers)
    trace = [float(sum(losses))]
    logger.debug("k-means iter 0: inertia %.12g", trace[-1])
    converged = False
    iterations = 0

    for it in range(1, max_iters + 1):
        iterations = it
        _reseed_empty(assignments, losses, centroids, measures, centroid_nodes, params, outer_iters,
                      bary_rel_tol, seed)
        _refit(assignments, centroids, measures, params, outer_iters, bary_rel_tol, seed + 1000 * it, workers)
        previous = assignments
        assignments, losses = _assign(measures, centroids, params, workers)
        trace.append(float(sum(losses)))
        logger.debug("k-means iter %d: inertia %.12g", it, trace[-1])
        if trace[-1] > trace[-2] + INERTIA_SLACK:
            logger.warning("k-means inertia rose from %.6g to %.6g", trace[-2], trace[-1])
        if assignments == previous:
            converged = True
            break

    logger.info("k-means: %d iterations, inertia %.6g, converged=%s", iterations, trace[-1], converged)
    return ClusteringResult(
        assignments=tuple(assignments),
        centroids=tuple(c.state for c in centroids),
        centroid_histograms=tuple(c.h for c in centroids),
        inertia_trace=tuple(trace),
        adjacency=tuple(frozen_array(threshold_adjacency(c.state.structure, threshold), dtype=np.int64)
                        for c in centroids),
        iterations=iterations,
        converged=converged,
        seeds=tuple(seeds),
    )


def _assign(
    measures: Sequence[StructuredMeasure],
    centroids: list[_Centroid],
    params: FgwParams,
    workers: int,
) -> tuple[list[int], list[float]]:
    """Nearest centroid per graph (ties: smallest cluster id); refit couplings seed the solves."""
    centers = [c.measure() for c in centroids]
    tasks = []
    for i, mu in enumerate(measures):
        for c, centroid in enumerate(centroids):
            run = params
            if i in centroid.couplings:
                run = params.model_copy(update={"starts": (*params.starts, np.array(centroid.couplings[i].matrix))})
            tasks.append((centers[c], mu, run))
    results = map_solves(tasks, workers)

    k = len(centroids)
    assignments: list[int] = []
    losses: list[float] = []
    pending: dict[int, dict[int, Coupling]] = {c: {} for c in range(k)}
    for i in range(len(measures)):
        row = results[i * k:(i + 1) * k]
        best = min(range(k), key=lambda c: (row[c].loss, c))
        assignments.append(best)
        losses.append(row[best].loss)
        pending[best][i] = row[best].coupling
    for c, centroid in enumerate(centroids):
        centroid.couplings = pending[c]
    return assignments, losses


def _reseed_empty(
    assignments: list[int],
    losses: list[float],
    centroids: list[_Centroid],
    measures: Sequence[StructuredMeasure],
    centroid_nodes: int | None,
    params: FgwParams,
    outer_iters: int,
    rel_tol: float,
    seed: int,
) -> None:
    for c, centroid in enumerate(centroids):
        if c in assignments:
            continue
        sizes = np.bincount(assignments, minlength=len(centroids))
        movable = [i for i in range(len(measures)) if sizes[assignments[i]] > 1]
        far = max(movable, key=lambda i: (losses[i], -i))
        logger.warning("k-means: cluster %d is empty, reseeding with graph %d", c, far)
        del centroids[assignments[far]].couplings[far]
        assignments[far] = c
        losses[far] = 0.0
        state, h = _seed_centroid(measures[far], centroid_nodes, params, outer_iters, rel_tol, seed + c)
        centroid.state, centroid.h = state, h
        centroid.couplings = {far: state.couplings[0]}


def _refit(
    assignments: list[int],
    centroids: list[_Centroid],
    measures: Sequence[StructuredMeasure],
    params: FgwParams,
    outer_iters: int,
    rel_tol: float,
    seed: int,
    workers: int,
) -> None:
    jobs = []
    for c, centroid in enumerate(centroids):
        members = [i for i, a in enumerate(assignments) if a == c]
        init = centroid.state.model_copy(update={"couplings": tuple(centroid.couplings[i] for i in members)})
        jobs.append(([measures[i] for i in members], centroid.h.size, centroid.h, params, outer_iters, rel_tol,
                     init, seed + c))
    if workers <= 1 or len(jobs) <= 1:
        states = [_fit_task(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            states = list(pool.map(_fit_task, jobs))
    for c, (centroid, state) in enumerate(zip(centroids, states, strict=True)):
        members = [i for i, a in enumerate(assignments) if a == c]
        centroid.state = state
        centroid.couplings = dict(zip(members, state.couplings, strict=True))


def clustering_score(assignments: Sequence[int], truth: Sequence[int]) -> float:
    """Adjusted Rand index against ground-truth classes."""
    if len(assignments) != len(truth):
        raise ValidationError(f"Got {len(truth)} ground-truth labels for {len(assignments)} assignments.")
    return float(adjusted_rand_score(list(truth), list(assignments)))
