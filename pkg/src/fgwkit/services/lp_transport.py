"""Exact discrete optimal transport (linear program over the transport polytope).

The LP is solved with the network simplex of POT (``ot.lp.emd``), which
returns a vertex of Pi(h, g) together with dual potentials. Costs may be
negative: they are shifted by their minimum before the call, which moves
every feasible plan's cost by the same constant because total mass is one.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike
from ot.lp import emd

from fgwkit.core.exceptions import DimensionMismatchError, NonFiniteCostError, SolverFailureError
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import Coupling, Histogram
from fgwkit.models.results import OtSolution

logger = logging.getLogger(__name__)

MAX_PIVOTS = 10_000_000


def solve_exact_ot(cost: ArrayLike, h: Histogram, g: Histogram) -> OtSolution:
    """Solve min <pi, cost> over Pi(h, g) exactly."""
    M = np.asarray(cost, dtype=np.float64)
    if M.shape != (h.size, g.size):
        raise DimensionMismatchError(f"Cost shape {M.shape} does not match histograms ({h.size}, {g.size}).")
    if not np.all(np.isfinite(M)):
        raise NonFiniteCostError("Cost matrix contains NaN or infinite entries.")

    shift = float(M.min())
    shifted = np.ascontiguousarray(M - shift)
    a = np.ascontiguousarray(h.weights, dtype=np.float64)
    b = np.ascontiguousarray(g.weights, dtype=np.float64)

    plan, log = emd(a, b, shifted, numItermax=MAX_PIVOTS, log=True)
    if log.get("result_code", 1) != 1:
        raise SolverFailureError(f"Network simplex stopped without an optimal basis: {log.get('warning')}")

    plan = np.maximum(np.asarray(plan, dtype=np.float64), 0.0)
    objective = float(np.sum(plan * M))
    dual_row = np.asarray(log["u"], dtype=np.float64) + shift
    dual_col = np.asarray(log["v"], dtype=np.float64)
    logger.debug("exact OT %dx%d: objective %.6g, support %d", M.shape[0], M.shape[1], objective,
                 int(np.count_nonzero(plan > 1e-12)))

    return OtSolution(
        coupling=Coupling(matrix=frozen_array(plan)),
        objective=objective,
        dual_row=frozen_array(dual_row),
        dual_col=frozen_array(dual_col),
    )


def wasserstein_cost(cost: ArrayLike, h: Histogram, g: Histogram) -> float:
    """Optimal objective only."""
    return solve_exact_ot(cost, h, g).objective
