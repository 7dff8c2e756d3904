"""Pairwise FGW matrices, the exp(-gamma FGW) kernel, k-NN and alpha sweeps."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fgwkit.core.exceptions import EmptyTrainSetError, InvalidGammaError, KTooLargeError, ValidationError
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import StructuredMeasure
from fgwkit.models.params import FgwParams
from fgwkit.models.results import DistanceMatrix, FgwResult, SweepPoint
from fgwkit.services.fgw_solver import fgw_terms, solve_fgw

logger = logging.getLogger(__name__)

Pair = tuple[StructuredMeasure, StructuredMeasure, FgwParams]


def _solve_pair(task: Pair) -> FgwResult:
    mu, nu, params = task
    return solve_fgw(mu, nu, params)


def map_solves(tasks: Sequence[Pair], workers: int = 1) -> list[FgwResult]:
    """Solve many independent pairs, results in task order.

    ``workers <= 1`` runs in-process; otherwise a process pool is used.
    Each solve is deterministic, so the result does not depend on workers.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [_solve_pair(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_pair, tasks, chunksize=chunk))


def map_losses(tasks: Sequence[Pair], workers: int = 1) -> list[float]:
    return [r.loss for r in map_solves(tasks, workers)]


def pairwise_fgw_matrix(
    measures: Sequence[StructuredMeasure],
    params: FgwParams,
    workers: int = 1,
) -> DistanceMatrix:
    """Symmetric K x K matrix of FGW losses; the diagonal is 0 by definition."""
    K = len(measures)
    index = [(i, j) for i in range(K) for j in range(i + 1, K)]
    logger.info("pairwise FGW: %d graphs, %d pairs, %d worker(s)", K, len(index), workers)
    losses = map_losses([(measures[i], measures[j], params) for i, j in index], workers)
    values = np.zeros((K, K), dtype=np.float64)
    for (i, j), loss in zip(index, losses, strict=True):
        values[i, j] = values[j, i] = loss
    return DistanceMatrix(
        values=frozen_array(values),
        alpha=params.alpha,
        q=params.q,
        starts=tuple(params.start_names()),
        names=tuple(m.name for m in measures),
    )


def cross_fgw_matrix(
    rows: Sequence[StructuredMeasure],
    cols: Sequence[StructuredMeasure],
    params: FgwParams,
    workers: int = 1,
) -> NDArray[np.float64]:
    """Rectangular matrix of FGW losses between two collections (e.g. test x train)."""
    index = [(i, j) for i in range(len(rows)) for j in range(len(cols))]
    losses = map_losses([(rows[i], cols[j], params) for i, j in index], workers)
    values = np.zeros((len(rows), len(cols)), dtype=np.float64)
    for (i, j), loss in zip(index, losses, strict=True):
        values[i, j] = loss
    return values


def fgw_kernel(D: DistanceMatrix | ArrayLike, gamma: float) -> NDArray[np.float64]:
    """Entrywise exp(-gamma D). Indefinite in general; no PSD projection is applied."""
    if not gamma > 0:
        raise InvalidGammaError(f"gamma must be > 0, got {gamma}.")
    values = D.values if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=np.float64)
    return np.exp(-gamma * values)


def knn_predict(distances: ArrayLike, train_labels: Sequence[int], k: int) -> list[int]:
    """Majority vote among the k nearest training graphs for each test row.

    Distance ties go to the smaller train index, vote ties to the smaller label.
    """
    D = np.asarray(distances, dtype=np.float64)
    labels = [int(x) for x in train_labels]
    if not labels:
        raise EmptyTrainSetError("k-NN needs at least one training graph.")
    if D.ndim == 1:
        D = D.reshape(1, -1)
    if D.shape[1] != len(labels):
        raise ValidationError(f"Distance rows have {D.shape[1]} columns for {len(labels)} training labels.")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}.")
    if k > len(labels):
        raise KTooLargeError(f"k={k} exceeds the {len(labels)} training graphs.")

    predictions: list[int] = []
    for row in D:
        nearest = np.argsort(row, kind="stable")[:k]
        votes = Counter(labels[i] for i in nearest)
        top = max(votes.values())
        predictions.append(min(label for label, count in votes.items() if count == top))
    return predictions


def alpha_sweep(
    mu: StructuredMeasure,
    nu: StructuredMeasure,
    alphas: Iterable[float],
    params: FgwParams,
) -> list[SweepPoint]:
    """Solve the same pair at each alpha and split every loss into its two terms."""
    points: list[SweepPoint] = []
    for alpha in alphas:
        if not 0.0 <= alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {alpha}.")
        run = params.model_copy(update={"alpha": float(alpha)})
        result = solve_fgw(mu, nu, run)
        terms = fgw_terms(mu, nu, result.coupling, run.q, run.alpha)
        points.append(
            SweepPoint(
                alpha=float(alpha),
                loss=result.loss,
                feature_term=terms.feature_term,
                structure_term=terms.structure_term,
                iterations=result.iterations,
                start=result.start,
            )
        )
        logger.debug("sweep alpha=%.4g loss=%.12g", alpha, result.loss)
    return points
