"""Fused Gromov-Wasserstein loss, gradient and conditional-gradient solver.

For an n x m coupling pi between measures with structures C1 (n x n) and
C2 (m x m) and feature distance matrix M (n x m), the loss is

    E_q(pi) = (1 - alpha) <M^q, pi> + alpha <L^q (x) pi, pi>

with (L^q (x) pi)_ij = sum_kl |C1_ik - C2_jl|^q pi_kl. For q = 2 the
contraction factors into matrix products; for q = 1 it is summed directly.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fgwkit.core.exceptions import DimensionMismatchError, MarginalMismatchError, UnsupportedExponentError
from fgwkit.models.base import frozen_array
from fgwkit.models.measure import MARGINAL_TOL, Coupling, Histogram, StructuredMeasure
from fgwkit.models.params import SUPPORTED_EXPONENTS, FgwParams, StartStrategy
from fgwkit.models.results import FgwResult, FgwTerms
from fgwkit.services.lp_transport import solve_exact_ot
from fgwkit.services.measures import feature_cost_matrix, make_coupling, product_coupling

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]


def _as_matrix(pi: Coupling | ArrayLike) -> Matrix:
    if isinstance(pi, Coupling):
        return pi.matrix
    return np.asarray(pi, dtype=np.float64)


def _check_exponent(q: int) -> None:
    if q not in SUPPORTED_EXPONENTS:
        raise UnsupportedExponentError(f"q must be one of {SUPPORTED_EXPONENTS}, got {q}")


def _check_shapes(C1: Matrix, C2: Matrix, pi: Matrix, M: Matrix | None = None) -> None:
    n, m = C1.shape[0], C2.shape[0]
    if C1.shape != (n, n) or C2.shape != (m, m):
        raise DimensionMismatchError(f"Structures must be square, got {C1.shape} and {C2.shape}.")
    if pi.shape != (n, m):
        raise DimensionMismatchError(f"Coupling shape {pi.shape} does not match structures ({n}, {m}).")
    if M is not None and M.shape != (n, m):
        raise DimensionMismatchError(f"Feature cost shape {M.shape} does not match ({n}, {m}).")


# ── Tensor contractions ──────────────────────────────────────────


def tensor_product_q2(C1: ArrayLike, C2: ArrayLike, pi: Coupling | ArrayLike) -> Matrix:
    """L^2 (x) pi in O(n^2 m + n m^2).

    Uses c_{C1,C2} - 2 C1 pi C2^T with
    c_{C1,C2} = (C1*C1) h 1^T + 1 g^T (C2*C2)^T, where h and g are the
    marginals of pi. The identity holds for any matrix pi.
    """
    A = np.asarray(C1, dtype=np.float64)
    B = np.asarray(C2, dtype=np.float64)
    P = _as_matrix(pi)
    _check_shapes(A, B, P)
    h = P.sum(axis=1)
    g = P.sum(axis=0)
    const = ((A * A) @ h)[:, None] + ((B * B) @ g)[None, :]
    return const - 2.0 * (A @ P @ B.T)


def tensor_product_naive(C1: ArrayLike, C2: ArrayLike, pi: Coupling | ArrayLike, q: int) -> Matrix:
    """L^q (x) pi by direct summation, O(n^2 m^2), one source row at a time."""
    A = np.asarray(C1, dtype=np.float64)
    B = np.asarray(C2, dtype=np.float64)
    P = _as_matrix(pi)
    _check_shapes(A, B, P)
    out = np.empty(P.shape, dtype=np.float64)
    for i in range(A.shape[0]):
        # diff[k, j, l] = |C1[i, k] - C2[j, l]|^q
        diff = np.abs(A[i][:, None, None] - B[None, :, :]) ** q
        out[i] = np.einsum("kjl,kl->j", diff, P)
    return out


def structure_product(C1: ArrayLike, C2: ArrayLike, pi: Coupling | ArrayLike, q: int) -> Matrix:
    """L^q (x) pi using the fastest available route for q."""
    _check_exponent(q)
    if q == 2:
        return tensor_product_q2(C1, C2, pi)
    return tensor_product_naive(C1, C2, pi, q)


# ── Loss and gradient ────────────────────────────────────────────


def fgw_loss(
    M_AB: ArrayLike | None,
    C1: ArrayLike,
    C2: ArrayLike,
    pi: Coupling | ArrayLike,
    q: int,
    alpha: float,
) -> float:
    """E_q at pi. M_AB holds unpowered feature distances; it may be None when alpha = 1."""
    _check_exponent(q)
    P = _as_matrix(pi)
    A = np.asarray(C1, dtype=np.float64)
    B = np.asarray(C2, dtype=np.float64)
    M = None if M_AB is None else np.asarray(M_AB, dtype=np.float64)
    _check_shapes(A, B, P, M)
    loss = 0.0
    if alpha < 1.0:
        if M is None:
            raise DimensionMismatchError("A feature cost matrix is required when alpha < 1.")
        loss += (1.0 - alpha) * float(np.sum(M**q * P))
    if alpha > 0.0:
        loss += alpha * float(np.sum(structure_product(A, B, P, q) * P))
    return max(loss, 0.0)


def fgw_gradient(
    M_AB: ArrayLike | None,
    C1: ArrayLike,
    C2: ArrayLike,
    pi: Coupling | ArrayLike,
    q: int,
    alpha: float,
) -> Matrix:
    """G = (1 - alpha) M^q + 2 alpha L^q (x) pi."""
    _check_exponent(q)
    P = _as_matrix(pi)
    A = np.asarray(C1, dtype=np.float64)
    B = np.asarray(C2, dtype=np.float64)
    M = None if M_AB is None else np.asarray(M_AB, dtype=np.float64)
    _check_shapes(A, B, P, M)
    grad = np.zeros(P.shape, dtype=np.float64)
    if alpha < 1.0:
        if M is None:
            raise DimensionMismatchError("A feature cost matrix is required when alpha < 1.")
        grad += (1.0 - alpha) * M**q
    if alpha > 0.0:
        grad += 2.0 * alpha * structure_product(A, B, P, q)
    return grad


# ── Line search ──────────────────────────────────────────────────


def _minimize_segment(a: float, b: float) -> float:
    """argmin over [0, 1] of a t^2 + b t."""
    if a > 0:
        return float(min(1.0, max(0.0, -b / (2.0 * a))))
    return 1.0 if a + b < 0 else 0.0


def _check_same_marginals(P: Matrix, T: Matrix) -> None:
    if P.shape != T.shape:
        raise DimensionMismatchError(f"Couplings differ in shape: {P.shape} vs {T.shape}.")
    if (
        np.abs(P.sum(axis=1) - T.sum(axis=1)).max() > MARGINAL_TOL
        or np.abs(P.sum(axis=0) - T.sum(axis=0)).max() > MARGINAL_TOL
    ):
        raise MarginalMismatchError("Line search endpoints must share their marginals.")


def line_search_q2(
    M_AB: ArrayLike | None,
    C1: ArrayLike,
    C2: ArrayLike,
    pi_prev: Coupling | ArrayLike,
    pi_tilde: Coupling | ArrayLike,
    alpha: float,
) -> tuple[float, tuple[float, float, float]]:
    """Exact minimizer of E_2 on the segment from pi_prev to pi_tilde.

    Along pi_prev + t D, with D = pi_tilde - pi_prev, E_2 = a t^2 + b t + c.
    D has zero marginals, so the c_{C1,C2} term drops out of a and b.
    """
    P = _as_matrix(pi_prev)
    T = _as_matrix(pi_tilde)
    A = np.asarray(C1, dtype=np.float64)
    B = np.asarray(C2, dtype=np.float64)
    _check_same_marginals(P, T)
    D = T - P

    a = -2.0 * alpha * float(np.sum((A @ D @ B) * D))
    b = -4.0 * alpha * float(np.sum((A @ P @ B) * D))
    if alpha < 1.0:
        M = np.asarray(M_AB, dtype=np.float64)
        b += (1.0 - alpha) * float(np.sum(M**2 * D))
    c = fgw_loss(M_AB, A, B, P, 2, alpha)
    return _minimize_segment(a, b), (a, b, c)


def line_search(
    M_AB: ArrayLike | None,
    C1: ArrayLike,
    C2: ArrayLike,
    pi_prev: Coupling | ArrayLike,
    pi_tilde: Coupling | ArrayLike,
    q: int,
    alpha: float,
) -> tuple[float, tuple[float, float, float]]:
    """Exact segment minimization for any supported q.

    E_q is a quadratic form in pi for every fixed q, so the same branch
    logic applies; q = 2 uses the closed-form coefficients.
    """
    _check_exponent(q)
    if q == 2:
        return line_search_q2(M_AB, C1, C2, pi_prev, pi_tilde, alpha)
    P = _as_matrix(pi_prev)
    T = _as_matrix(pi_tilde)
    _check_same_marginals(P, T)
    D = T - P
    a = 0.0
    b = 0.0
    if alpha > 0.0:
        a = alpha * float(np.sum(tensor_product_naive(C1, C2, D, q) * D))
        b = 2.0 * alpha * float(np.sum(tensor_product_naive(C1, C2, P, q) * D))
    if alpha < 1.0:
        M = np.asarray(M_AB, dtype=np.float64)
        b += (1.0 - alpha) * float(np.sum(M**q * D))
    c = fgw_loss(M_AB, C1, C2, P, q, alpha)
    return _minimize_segment(a, b), (a, b, c)


# ── Conditional gradient ─────────────────────────────────────────


def _conditional_gradient(
    M: Matrix | None,
    C1: Matrix,
    C2: Matrix,
    h: Histogram,
    g: Histogram,
    pi0: Matrix,
    q: int,
    alpha: float,
    max_iter: int,
    rel_tol: float,
    start: str,
) -> FgwResult:
    pi = pi0
    loss = fgw_loss(M, C1, C2, pi, q, alpha)
    trace = [loss]
    converged = False

    for _ in range(max_iter):
        grad = fgw_gradient(M, C1, C2, pi, q, alpha)
        target = solve_exact_ot(grad, h, g).coupling.matrix
        tau, _ = line_search(M, C1, C2, pi, target, q, alpha)
        if tau <= 0.0:
            converged = True
            break
        candidate = np.maximum(pi + tau * (target - pi), 0.0)
        new_loss = fgw_loss(M, C1, C2, candidate, q, alpha)
        if new_loss > loss:
            # Rounding noise at a stationary point; the current iterate stands.
            converged = True
            break
        decrease = (loss - new_loss) / max(loss, 1e-16)
        pi, loss = candidate, new_loss
        trace.append(loss)
        logger.debug("CG[%s] iter %d: loss %.12g tau %.4g", start, len(trace) - 1, loss, tau)
        if decrease < rel_tol:
            converged = True
            break

    if not converged:
        logger.warning("CG[%s] reached max_iter=%d without converging (loss %.6g)", start, max_iter, loss)
    return FgwResult(
        coupling=Coupling(matrix=frozen_array(pi)),
        loss=loss,
        iterations=len(trace) - 1,
        loss_trace=tuple(trace),
        converged=converged,
        start=start,
    )


def solve_fgw(mu: StructuredMeasure, nu: StructuredMeasure, params: FgwParams) -> FgwResult:
    """FGW between two measures by conditional gradient, best over all starts.

    alpha = 0 is solved exactly as a linear program on M^q; alpha = 1
    ignores features entirely and solves the Gromov-Wasserstein problem.
    """
    q, alpha = params.q, params.alpha
    _check_exponent(q)
    h, g = mu.h, nu.h
    C1, C2 = mu.structure, nu.structure

    M: Matrix | None = None if alpha >= 1.0 else feature_cost_matrix(mu, nu)

    if alpha <= 0.0:
        assert M is not None
        sol = solve_exact_ot(M**q, h, g)
        return FgwResult(
            coupling=sol.coupling,
            loss=max(sol.objective, 0.0),
            iterations=0,
            loss_trace=(max(sol.objective, 0.0),),
            converged=True,
            start=StartStrategy.WASSERSTEIN.value,
        )

    best: FgwResult | None = None
    for start in params.starts:
        pi0, name = _start_coupling(start, mu, nu, M, params)
        result = _conditional_gradient(
            M, C1, C2, h, g, pi0, q, alpha, params.max_iter, params.rel_tol, name
        )
        logger.debug("start %s: loss %.12g after %d iterations", name, result.loss, result.iterations)
        if best is None or result.loss < best.loss:
            best = result
    assert best is not None
    return best


def _start_coupling(
    start: Any,
    mu: StructuredMeasure,
    nu: StructuredMeasure,
    M: Matrix | None,
    params: FgwParams,
) -> tuple[Matrix, str]:
    if isinstance(start, np.ndarray):
        return make_coupling(start, mu.h, nu.h).matrix, "given"
    strategy = StartStrategy(start)
    if strategy is StartStrategy.PRODUCT:
        return product_coupling(mu.h, nu.h).matrix, strategy.value
    if strategy is StartStrategy.WASSERSTEIN:
        cost = M if M is not None else feature_cost_matrix(mu, nu)
        return solve_exact_ot(cost**params.q, mu.h, nu.h).coupling.matrix, strategy.value
    gw = _conditional_gradient(
        None, mu.structure, nu.structure, mu.h, nu.h,
        product_coupling(mu.h, nu.h).matrix, params.q, 1.0,
        params.max_iter, params.rel_tol, strategy.value,
    )
    return gw.coupling.matrix, strategy.value


def fgw_terms(mu: StructuredMeasure, nu: StructuredMeasure, pi: Coupling | ArrayLike, q: int, alpha: float) -> FgwTerms:
    """Feature term H_q, structure term J_q and the exact W_q^q at a coupling."""
    _check_exponent(q)
    P = _as_matrix(pi)
    M = feature_cost_matrix(mu, nu)
    feature_term = float(np.sum(M**q * P))
    structure_term = max(float(np.sum(structure_product(mu.structure, nu.structure, P, q) * P)), 0.0)
    w = solve_exact_ot(M**q, mu.h, nu.h).objective
    return FgwTerms(
        loss=(1.0 - alpha) * feature_term + alpha * structure_term,
        feature_term=feature_term,
        structure_term=structure_term,
        wasserstein=w,
    )


# ── Coupling composition ─────────────────────────────────────────


def compose_couplings(P: Coupling | ArrayLike, Q: Coupling | ArrayLike) -> Coupling:
    """Glue P in Pi(h, g) and Q in Pi(g, f) into S = P diag(1/g) Q in Pi(h, f)."""
    A = _as_matrix(P)
    B = _as_matrix(Q)
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatchError(f"Cannot compose couplings of shapes {A.shape} and {B.shape}.")
    middle = A.sum(axis=0)
    if np.abs(middle - B.sum(axis=1)).max() > MARGINAL_TOL:
        raise MarginalMismatchError("Middle marginals of the two couplings differ.")
    inv = np.divide(1.0, middle, out=np.zeros_like(middle), where=middle > 0)
    return Coupling(matrix=frozen_array((A * inv[None, :]) @ B))
