"""Pairwise comparison commands: FGW between two graphs and alpha sweeps."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
from numpy.typing import NDArray

from fgwkit.cli.common import (
    alpha_option,
    build_params,
    input_options,
    load_measure_groups,
    parse_float_list,
    solver_options,
)
from fgwkit.cli.main import FgwContext, pass_context
from fgwkit.core.exceptions import MissingFileError, SchemaError
from fgwkit.models.measure import StructuredMeasure
from fgwkit.models.params import FgwParams
from fgwkit.output.files import dumps_table_csv, write_json
from fgwkit.services.distances import alpha_sweep
from fgwkit.services.fgw_solver import fgw_terms, solve_fgw
from fgwkit.services.graphs import check_permutation
from fgwkit.services.measures import make_coupling


def _permutation_start(path: str, mu: StructuredMeasure, nu: StructuredMeasure) -> NDArray[np.float64]:
    """Coupling sending node i of A to node sigma[i] of B with mass h_i."""
    source = Path(path)
    if not source.is_file():
        raise MissingFileError(f"Permutation file not found: {source}")
    try:
        sigma = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{source}: invalid JSON ({e.msg}).") from e
    if isinstance(sigma, dict):
        sigma = sigma.get("permutation")
    if not isinstance(sigma, list):
        raise SchemaError(f"{source}: expected a list of node indices.")
    perm = check_permutation(sigma, mu.size)
    matrix = np.zeros((mu.size, nu.size), dtype=np.float64)
    matrix[np.arange(mu.size), perm] = mu.h.weights
    return make_coupling(matrix, mu.h, nu.h).matrix


def _with_permutation(params: FgwParams, start: str | None, mu: StructuredMeasure,
                      nu: StructuredMeasure) -> FgwParams:
    if start is None:
        return params
    return params.model_copy(update={"starts": (*params.starts, _permutation_start(start, mu, nu))})


@click.command("dist")
@click.option("--a", "a_path", required=True, type=click.Path(dir_okay=False), help="First graph (JSON).")
@click.option("--b", "b_path", required=True, type=click.Path(dir_okay=False), help="Second graph (JSON).")
@alpha_option
@solver_options
@input_options
@click.option("--start-permutation", default=None, type=click.Path(dir_okay=False),
              help="JSON list sigma: add the coupling i -> sigma[i] as a start.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Result JSON file.")
@pass_context
def dist(
    ctx: FgwContext, a_path: str, b_path: str, alpha: float, q: str, starts: str, rel_tol: float | None,
    max_iter: int | None, structure: str | None, feature: str | None, largest: bool,
    start_permutation: str | None, out_path: str | None,
) -> None:
    """FGW distance between two graphs."""
    (group_a, group_b), _ = load_measure_groups([[a_path], [b_path]], structure, feature, largest)
    mu, nu = group_a[0], group_b[0]
    params = _with_permutation(build_params(ctx, alpha, q, starts, rel_tol, max_iter), start_permutation, mu, nu)

    result = solve_fgw(mu, nu, params)
    terms = fgw_terms(mu, nu, result.coupling, params.q, params.alpha)
    payload = {
        "a": mu.name,
        "b": nu.name,
        "alpha": params.alpha,
        "q": params.q,
        "loss": result.loss,
        "converged": result.converged,
        "iterations": result.iterations,
        "start": result.start,
        "terms": {
            "feature": terms.feature_term,
            "structure": terms.structure_term,
            "wasserstein": terms.wasserstein,
        },
        "trace": list(result.loss_trace),
        "coupling": result.coupling.matrix,
    }
    if out_path:
        write_json(out_path, payload)

    if ctx.json_mode:
        ctx.formatter.json({k: v for k, v in payload.items() if k != "coupling"})
        return
    ctx.formatter.summary(f"FGW {mu.name} ↔ {nu.name}", {
        "alpha": params.alpha,
        "q": params.q,
        "loss": result.loss,
        "feature term": terms.feature_term,
        "structure term": terms.structure_term,
        "W (exact)": terms.wasserstein,
        "iterations": result.iterations,
        "converged": result.converged,
        "best start": result.start,
    })
    if out_path:
        ctx.formatter.success(f"Wrote {out_path}")


@click.command("sweep")
@click.option("--a", "a_path", required=True, type=click.Path(dir_okay=False), help="First graph (JSON).")
@click.option("--b", "b_path", required=True, type=click.Path(dir_okay=False), help="Second graph (JSON).")
@click.option("--alphas", default="0,0.25,0.5,0.75,1", show_default=True, help="Comma-separated alpha values.")
@solver_options
@input_options
@click.option("--start-permutation", default=None, type=click.Path(dir_okay=False),
              help="JSON list sigma: add the coupling i -> sigma[i] as a start.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Result file (.json or .csv).")
@pass_context
def sweep(
    ctx: FgwContext, a_path: str, b_path: str, alphas: str, q: str, starts: str, rel_tol: float | None,
    max_iter: int | None, structure: str | None, feature: str | None, largest: bool,
    start_permutation: str | None, out_path: str | None,
) -> None:
    """FGW between two graphs across a range of alpha values."""
    values = parse_float_list(alphas, "alpha")
    (group_a, group_b), _ = load_measure_groups([[a_path], [b_path]], structure, feature, largest)
    mu, nu = group_a[0], group_b[0]
    params = _with_permutation(build_params(ctx, values[0], q, starts, rel_tol, max_iter), start_permutation, mu, nu)
    points = alpha_sweep(mu, nu, values, params)

    if out_path:
        target = Path(out_path)
        if target.suffix.lower() == ".csv":
            rows = [[p.alpha, p.loss, p.feature_term, p.structure_term] for p in points]
            text = dumps_table_csv(["alpha", "loss", "feature_term", "structure_term"], rows,
                                   {"a": mu.name, "b": nu.name, "q": params.q})
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        else:
            write_json(target, {"a": mu.name, "b": nu.name, "q": params.q,
                                "points": [p.to_dict() for p in points]})

    if ctx.json_mode:
        ctx.formatter.json([p.to_dict() for p in points])
        return
    ctx.formatter.table(
        title=f"Alpha sweep {mu.name} ↔ {nu.name}",
        columns=[("alpha", "bold"), ("loss", ""), ("feature", "green"), ("structure", "magenta"), ("start", "dim")],
        rows=[[f"{p.alpha:g}", f"{p.loss:.6g}", f"{p.feature_term:.6g}", f"{p.structure_term:.6g}", p.start]
              for p in points],
    )
    if out_path:
        ctx.formatter.success(f"Wrote {out_path}")
