"""FGW barycenters by block-coordinate descent (q = 2).

The barycenter has N nodes with a fixed histogram h. Each outer iteration
solves the K coupling subproblems, then applies the closed-form updates of
the structure C and the features A. Couplings are oriented N x n_k, barycenter
nodes on the rows.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fgwkit.core.exceptions import (
    DimensionMismatchError,
    MixedFeatureModesError,
    NonPositiveWeightError,
    UnsupportedExponentError,
    ValidationError,
)
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import Coupling, FeatureMode, Histogram, StructuredMeasure
from fgwkit.models.params import FgwParams, make_params
from fgwkit.models.results import BarycenterProblem, BarycenterState
from fgwkit.services.fgw_solver import fgw_loss, solve_fgw
from fgwkit.services.graphs import random_connected_graph, shortest_path_matrix
from fgwkit.services.measures import check_coupling, feature_cost_matrix, product_coupling, uniform_histogram

logger = logging.getLogger(__name__)


def _matrices(couplings: Sequence[Coupling | ArrayLike]) -> list[NDArray[np.float64]]:
    return [c.matrix if isinstance(c, Coupling) else np.asarray(c, dtype=np.float64) for c in couplings]


def _check_lambdas(lambdas: Sequence[float], count: int) -> NDArray[np.float64]:
    lam = np.asarray(lambdas, dtype=np.float64)
    if lam.shape != (count,):
        raise DimensionMismatchError(f"Got {lam.size} lambdas for {count} inputs.")
    if (lam <= 0).any():
        raise NonPositiveWeightError("Barycenter weights must be > 0.")
    return lam


def update_structure(
    couplings: Sequence[Coupling | ArrayLike],
    input_structures: Sequence[ArrayLike],
    lambdas: Sequence[float],
    h: Histogram,
) -> NDArray[np.float64]:
    """C = sum_k lambda_k pi_k C_k pi_k^T / (h h^T), symmetrized, zero diagonal."""
    plans = _matrices(couplings)
    lam = _check_lambdas(lambdas, len(plans))
    if len(input_structures) != len(plans):
        raise DimensionMismatchError(f"Got {len(input_structures)} structures for {len(plans)} couplings.")
    N = h.size
    acc = np.zeros((N, N), dtype=np.float64)
    for weight, pi, C_k in zip(lam, plans, input_structures, strict=True):
        C = np.asarray(C_k, dtype=np.float64)
        if pi.shape != (N, C.shape[0]):
            raise DimensionMismatchError(f"Coupling shape {pi.shape} does not match ({N}, {C.shape[0]}).")
        acc += weight * (pi @ C @ pi.T)
    C_bar = acc / np.outer(h.weights, h.weights)
    C_bar = (C_bar + C_bar.T) / 2.0
    np.fill_diagonal(C_bar, 0.0)
    return C_bar


def update_features(
    couplings: Sequence[Coupling | ArrayLike],
    input_features: Sequence[ArrayLike],
    lambdas: Sequence[float],
    h: Histogram,
) -> NDArray[np.float64]:
    """A = diag(1/h) sum_k lambda_k pi_k B_k: coupling-weighted averages of input features."""
    plans = _matrices(couplings)
    lam = _check_lambdas(lambdas, len(plans))
    if len(input_features) != len(plans):
        raise DimensionMismatchError(f"Got {len(input_features)} feature sets for {len(plans)} couplings.")
    blocks = [np.asarray(B, dtype=np.float64) for B in input_features]
    dims = {B.shape[1] for B in blocks}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Input feature dimensions differ: {sorted(dims)}.")
    N = h.size
    acc = np.zeros((N, dims.pop()), dtype=np.float64)
    for weight, pi, B in zip(lam, plans, blocks, strict=True):
        if pi.shape != (N, B.shape[0]):
            raise DimensionMismatchError(f"Coupling shape {pi.shape} does not match ({N}, {B.shape[0]}).")
        acc += weight * (pi @ B)
    return acc / h.weights[:, None]


def make_barycenter_problem(
    inputs: Sequence[StructuredMeasure],
    n_nodes: int,
    alpha: float,
    lambdas: Sequence[float] | None = None,
    h: Histogram | None = None,
    outer_iters: int = 30,
    rel_tol: float = 1e-7,
    inner: FgwParams | None = None,
    fix_features: bool = False,
    fix_structure: bool = False,
    warm_start: bool = False,
) -> BarycenterProblem:
    """Validate inputs and assemble a BarycenterProblem.

    Lambdas default to uniform and are renormalized; h defaults to uniform.
    """
    if not inputs:
        raise ValidationError("A barycenter needs at least one input measure.")
    if n_nodes < 1:
        raise ValidationError(f"Barycenter node count must be >= 1, got {n_nodes}.")
    if outer_iters < 1:
        raise ValidationError(f"outer_iters must be >= 1, got {outer_iters}.")
    modes = {m.feature_mode for m in inputs}
    if modes != {FeatureMode.EUCLIDEAN}:
        raise MixedFeatureModesError("Barycenters need Euclidean vector features on every input.")
    dims = {m.feature_dim for m in inputs}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Input feature dimensions differ: {sorted(dims)}.")

    lam = _check_lambdas(lambdas if lambdas is not None else [1.0] * len(inputs), len(inputs))
    lam = lam / lam.sum()
    hist = h if h is not None else uniform_histogram(n_nodes)
    if hist.size != n_nodes:
        raise DimensionMismatchError(f"Histogram has {hist.size} bins for {n_nodes} barycenter nodes.")
    params = inner if inner is not None else make_params(alpha)
    if params.q != 2:
        raise UnsupportedExponentError("Barycenter updates are closed-form only for q = 2.")
    if params.alpha != alpha:
        params = params.model_copy(update={"alpha": alpha})

    return BarycenterProblem(
        inputs=tuple(inputs),
        lambdas=tuple(float(x) for x in lam),
        n_nodes=n_nodes,
        h=hist,
        alpha=alpha,
        outer_iters=outer_iters,
        rel_tol=rel_tol,
        inner=params,
        fix_features=fix_features,
        fix_structure=fix_structure,
        warm_start=warm_start,
    )


def barycenter_measure(
    structure: ArrayLike, features: ArrayLike, h: Histogram, name: str = "barycenter"
) -> StructuredMeasure:
    """Wrap a barycenter candidate as a measure the solver can consume."""
    return StructuredMeasure(h=h, features=frozen_array(features), structure=frozen_array(structure), name=name)


def barycenter_objective(
    problem: BarycenterProblem,
    structure: ArrayLike,
    features: ArrayLike,
    couplings: Sequence[Coupling],
) -> float:
    """sum_k lambda_k E_2 at the given candidate and couplings."""
    center = barycenter_measure(structure, features, problem.h)
    total = 0.0
    for weight, mu_k, pi in zip(problem.lambdas, problem.inputs, couplings, strict=True):
        M = feature_cost_matrix(center, mu_k) if problem.alpha < 1.0 else None
        total += weight * fgw_loss(M, center.structure, mu_k.structure, pi, 2, problem.alpha)
    return total


def _initial_state(problem: BarycenterProblem, rng: np.random.Generator) -> BarycenterState:
    N = problem.n_nodes
    pick = int(rng.integers(len(problem.inputs)))
    if problem.inputs[pick].size == N:
        C0 = np.array(problem.inputs[pick].structure)
    else:
        C0 = shortest_path_matrix(random_connected_graph(N, rng))
    couplings = tuple(product_coupling(problem.h, mu.h) for mu in problem.inputs)
    A0 = update_features(couplings, [mu.features for mu in problem.inputs], problem.lambdas, problem.h)
    objective = barycenter_objective(problem, C0, A0, couplings)
    return BarycenterState(
        structure=frozen_array(C0), features=frozen_array(A0), couplings=couplings,
        objective=objective, objective_trace=(objective,),
    )


def _seed_state(problem: BarycenterProblem, init: BarycenterState) -> BarycenterState:
    N, d = problem.n_nodes, problem.inputs[0].feature_dim
    if init.structure.shape != (N, N) or init.features.shape != (N, d):
        raise DimensionMismatchError(
            f"Initial state has shapes {init.structure.shape} / {init.features.shape}, "
            f"expected ({N}, {N}) / ({N}, {d})."
        )
    couplings = init.couplings
    if len(couplings) != len(problem.inputs):
        couplings = tuple(product_coupling(problem.h, mu.h) for mu in problem.inputs)
    for pi, mu in zip(couplings, problem.inputs, strict=True):
        check_coupling(pi, problem.h, mu.h)
    objective = barycenter_objective(problem, init.structure, init.features, couplings)
    return BarycenterState(
        structure=init.structure, features=init.features, couplings=couplings,
        objective=objective, objective_trace=(objective,),
    )


def _update_couplings(
    problem: BarycenterProblem, structure: NDArray[np.float64], features: NDArray[np.float64],
    previous: Sequence[Coupling],
) -> tuple[Coupling, ...]:
    center = barycenter_measure(structure, features, problem.h)
    updated: list[Coupling] = []
    for mu_k, prev in zip(problem.inputs, previous, strict=True):
        params = problem.inner
        if problem.warm_start:
            params = params.model_copy(update={"starts": (*params.starts, np.array(prev.matrix))})
        result = solve_fgw(center, mu_k, params)
        M = feature_cost_matrix(center, mu_k) if problem.alpha < 1.0 else None
        prev_loss = fgw_loss(M, center.structure, mu_k.structure, prev, 2, problem.alpha)
        # CG reaches a stationary point only; never trade a better coupling for it.
        updated.append(result.coupling if result.loss <= prev_loss else prev)
    return tuple(updated)


def solve_barycenter(
    problem: BarycenterProblem,
    init: BarycenterState | None = None,
    seed: int = 0,
) -> BarycenterState:
    """Minimize sum_k lambda_k FGW(barycenter, input_k) over couplings, C and A.

    Stops after ``outer_iters`` rounds or once the relative objective decrease
    drops below ``rel_tol``. ``fix_structure`` / ``fix_features`` skip the
    corresponding closed-form block.
    """
    rng = np.random.default_rng(seed)
    state = _seed_state(problem, init) if init is not None else _initial_state(problem, rng)
    C = np.array(state.structure)
    A = np.array(state.features)
    couplings = state.couplings
    objective = state.objective
    trace = [objective]
    if objective <= 0.0:
        logger.debug("barycenter: initial objective is 0, nothing to do")
        return state

    iterations = 0
    for outer in range(problem.outer_iters):
        couplings = _update_couplings(problem, C, A, couplings)
        if not problem.fix_structure:
            C = update_structure(couplings, [mu.structure for mu in problem.inputs], problem.lambdas, problem.h)
        if not problem.fix_features:
            A = update_features(couplings, [mu.features for mu in problem.inputs], problem.lambdas, problem.h)
        new_objective = barycenter_objective(problem, C, A, couplings)
        decrease = (objective - new_objective) / max(objective, 1e-16)
        objective = new_objective
        trace.append(objective)
        iterations = outer + 1
        logger.debug("barycenter outer %d: objective %.12g", iterations, objective)
        if decrease < problem.rel_tol:
            break

    logger.info("barycenter: %d outer iterations, objective %.6g", iterations, objective)
    return BarycenterState(
        structure=frozen_array(C),
        features=frozen_array(A),
        couplings=couplings,
        objective=objective,
        objective_trace=tuple(trace),
        iterations=iterations,
    )


def threshold_adjacency(structure: ArrayLike, threshold: float) -> NDArray[np.int64]:
    """0/1 adjacency of a centroid: edge (i, j) iff C(i, j) <= threshold, i != j."""
    C = np.asarray(structure, dtype=np.float64)
    adj = (C <= threshold).astype(np.int64)
    np.fill_diagonal(adj, 0)
    return adj
