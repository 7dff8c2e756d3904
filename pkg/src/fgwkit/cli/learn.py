"""Learning commands: barycenters, k-means clustering, k-NN and FGW kernels."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import click
import numpy as np

from fgwkit.cli.common import (
    alpha_option,
    build_params,
    graph_labels,
    input_options,
    load_measure_groups,
    parse_float_list,
    solver_options,
    workers_option,
)
from fgwkit.cli.main import FgwContext, pass_context
from fgwkit.models.measure import Histogram
from fgwkit.models.results import BarycenterState
from fgwkit.output.files import write_json, write_matrix_csv
from fgwkit.services.barycenter import make_barycenter_problem, solve_barycenter, threshold_adjacency
from fgwkit.services.clustering import clustering_score, kmeans_graphs
from fgwkit.services.distances import cross_fgw_matrix, fgw_kernel, knn_predict, pairwise_fgw_matrix


def _inputs_option(name: str, help_text: str) -> Any:
    return click.option(f"--{name}", f"{name}_paths", multiple=True, required=True,
                        type=click.Path(exists=True), help=help_text)


def _state_payload(state: BarycenterState, h: Histogram, threshold: float | None) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "objective": state.objective,
        "iterations": state.iterations,
        "objective_trace": list(state.objective_trace),
        "histogram": h.weights,
        "structure": state.structure,
        "features": state.features,
    }
    if threshold is not None:
        payload["threshold"] = threshold
        payload["adjacency"] = threshold_adjacency(state.structure, threshold)
    return payload


# ── barycenter ───────────────────────────────────────────────────


@click.command("barycenter")
@_inputs_option("inputs", "Graph directory or JSON files (repeatable).")
@click.option("--n", "n_nodes", required=True, type=click.IntRange(min=1), help="Barycenter node count.")
@alpha_option
@click.option("--lambdas", default=None, help="Comma-separated input weights (default uniform).")
@click.option("--fix-features", is_flag=True, help="Keep the initial features; update structure only.")
@click.option("--fix-structure", is_flag=True, help="Keep the initial structure; update features only.")
@click.option("--warm-start", is_flag=True, help="Also start each coupling solve from the previous coupling.")
@click.option("--outer-iters", type=click.IntRange(min=1), default=None, help="Block-descent rounds.")
@click.option("--threshold", type=float, default=None, help="Also export the adjacency C(i, j) <= T.")
@click.option("--seed", type=int, default=0, show_default=True)
@solver_options
@input_options
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Result JSON file.")
@pass_context
def barycenter(
    ctx: FgwContext, inputs_paths: tuple[str, ...], n_nodes: int, alpha: float, lambdas: str | None,
    fix_features: bool, fix_structure: bool, warm_start: bool, outer_iters: int | None, threshold: float | None,
    seed: int, q: str, starts: str, rel_tol: float | None, max_iter: int | None, structure: str | None,
    feature: str | None, largest: bool, out_path: str,
) -> None:
    """FGW barycenter of a set of graphs with vector features."""
    if fix_features and fix_structure:
        raise click.UsageError("--fix-features and --fix-structure are mutually exclusive.")
    (measures,), _ = load_measure_groups([inputs_paths], structure, feature, largest)
    params = build_params(ctx, alpha, q, starts, rel_tol, max_iter)
    problem = make_barycenter_problem(
        measures, n_nodes, alpha,
        lambdas=parse_float_list(lambdas, "lambdas") if lambdas else None,
        outer_iters=outer_iters if outer_iters is not None else int(ctx.setting("barycenter", "outer_iters")),
        rel_tol=float(ctx.setting("barycenter", "rel_tol")),
        inner=params,
        fix_features=fix_features,
        fix_structure=fix_structure,
        warm_start=warm_start,
    )
    state = solve_barycenter(problem, seed=seed)

    payload = {
        "inputs": [m.name for m in measures],
        "lambdas": list(problem.lambdas),
        "alpha": alpha,
        "n": n_nodes,
        "seed": seed,
        **_state_payload(state, problem.h, threshold),
    }
    write_json(out_path, payload)

    if ctx.json_mode:
        ctx.formatter.json({k: payload[k] for k in ("inputs", "alpha", "n", "objective", "iterations")})
        return
    ctx.formatter.summary(f"Barycenter of {len(measures)} graphs", {
        "nodes": n_nodes,
        "alpha": alpha,
        "objective": state.objective,
        "outer iterations": state.iterations,
    })
    ctx.formatter.success(f"Wrote {out_path}")


# ── cluster ──────────────────────────────────────────────────────


@click.command("cluster")
@_inputs_option("inputs", "Graph directory or JSON files (repeatable).")
@click.option("--k", "k", required=True, type=click.IntRange(min=1), help="Number of clusters.")
@alpha_option
@click.option("--centroid-nodes", type=click.IntRange(min=1), default=None,
              help="Centroid node count (default: size of each seed graph).")
@click.option("--threshold", type=float, default=None, help="Centroid adjacency threshold (default from config).")
@click.option("--max-iters", type=click.IntRange(min=1), default=None, help="Lloyd iteration cap.")
@click.option("--seed", type=int, default=0, show_default=True)
@solver_options
@input_options
@workers_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Result JSON file.")
@pass_context
def cluster(
    ctx: FgwContext, inputs_paths: tuple[str, ...], k: int, alpha: float, centroid_nodes: int | None,
    threshold: float | None, max_iters: int | None, seed: int, q: str, starts: str, rel_tol: float | None,
    max_iter: int | None, structure: str | None, feature: str | None, largest: bool, workers: int | None,
    out_path: str,
) -> None:
    """k-means over graphs with FGW barycenter centroids."""
    (measures,), (graphs,) = load_measure_groups([inputs_paths], structure, feature, largest)
    params = build_params(ctx, alpha, q, starts, rel_tol, max_iter)
    cut = threshold if threshold is not None else float(ctx.setting("clustering", "threshold"))
    result = kmeans_graphs(
        measures, k, params,
        centroid_nodes=centroid_nodes,
        threshold=cut,
        seed=seed,
        max_iters=max_iters if max_iters is not None else int(ctx.setting("clustering", "max_iters")),
        outer_iters=int(ctx.setting("barycenter", "outer_iters")),
        bary_rel_tol=float(ctx.setting("barycenter", "rel_tol")),
        workers=ctx.workers(workers),
    )
    ari = None
    if all(g.graph_label is not None for g in graphs):
        ari = clustering_score(result.assignments, graph_labels(graphs, "input"))

    payload: dict[str, Any] = {
        "names": [m.name for m in measures],
        "assignments": list(result.assignments),
        "k": k,
        "alpha": alpha,
        "seed": seed,
        "seeds": list(result.seeds),
        "iterations": result.iterations,
        "converged": result.converged,
        "inertia_trace": list(result.inertia_trace),
    }
    if ari is not None:
        payload["ari"] = ari
    payload["centroids"] = [
        _state_payload(state, h, cut)
        for state, h in zip(result.centroids, result.centroid_histograms, strict=True)
    ]
    write_json(out_path, payload)

    if ctx.json_mode:
        ctx.formatter.json({key: v for key, v in payload.items() if key != "centroids"})
        return
    sizes = np.bincount(np.asarray(result.assignments), minlength=k)
    ctx.formatter.table(
        title=f"k-means over {len(measures)} graphs",
        columns=[("cluster", "bold"), ("members", ""), ("centroid nodes", "dim")],
        rows=[[str(c), str(int(sizes[c])), str(result.centroid_histograms[c].size)] for c in range(k)],
    )
    ctx.formatter.summary("Clustering", {
        "iterations": result.iterations,
        "converged": result.converged,
        "inertia": result.inertia_trace[-1],
        **({"adjusted Rand index": ari} if ari is not None else {}),
    })
    ctx.formatter.success(f"Wrote {out_path}")


# ── knn ──────────────────────────────────────────────────────────


@click.command("knn")
@_inputs_option("train", "Labelled training graphs (directory or files, repeatable).")
@_inputs_option("test", "Graphs to classify (directory or files, repeatable).")
@click.option("--k", "k", required=True, type=click.IntRange(min=1), help="Number of neighbours.")
@alpha_option
@solver_options
@input_options
@workers_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Predictions JSON file.")
@pass_context
def knn(
    ctx: FgwContext, train_paths: tuple[str, ...], test_paths: tuple[str, ...], k: int, alpha: float, q: str,
    starts: str, rel_tol: float | None, max_iter: int | None, structure: str | None, feature: str | None,
    largest: bool, workers: int | None, out_path: str,
) -> None:
    """Classify graphs by majority vote among their k FGW-nearest training graphs."""
    (train, test), (train_graphs, test_graphs) = load_measure_groups(
        [train_paths, test_paths], structure, feature, largest,
    )
    labels = graph_labels(train_graphs, "training")
    params = build_params(ctx, alpha, q, starts, rel_tol, max_iter)
    distances = cross_fgw_matrix(test, train, params, ctx.workers(workers))
    predictions = knn_predict(distances, labels, k)

    payload: dict[str, Any] = {
        "k": k,
        "alpha": alpha,
        "q": params.q,
        "names": [m.name for m in test],
        "predictions": predictions,
    }
    truth = [g.graph_label for g in test_graphs]
    accuracy = None
    if all(t is not None for t in truth):
        accuracy = float(np.mean([p == t for p, t in zip(predictions, truth, strict=True)]))
        payload["accuracy"] = accuracy
    write_json(out_path, payload)

    if ctx.json_mode:
        ctx.formatter.json(payload)
        return
    ctx.formatter.table(
        title=f"{k}-NN predictions",
        columns=[("graph", "bold"), ("predicted", "green"), ("label", "dim")],
        rows=[[m.name, str(p), "" if t is None else str(t)] for m, p, t in zip(test, predictions, truth, strict=True)],
    )
    if accuracy is not None:
        ctx.formatter.info(f"Accuracy: {accuracy:.4f}")
    ctx.formatter.success(f"Wrote {out_path}")


# ── kernel ───────────────────────────────────────────────────────


@click.command("kernel")
@_inputs_option("inputs", "Graph directory or JSON files (repeatable).")
@alpha_option
@click.option("--gamma", required=True, type=float, help="Kernel bandwidth: K = exp(-gamma * D).")
@solver_options
@input_options
@workers_option
@click.option("--distances-out", default=None, type=click.Path(dir_okay=False),
              help="Also write the FGW distance matrix (.json for JSON, CSV otherwise).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Kernel matrix file (.json for JSON, CSV otherwise).")
@pass_context
def kernel(
    ctx: FgwContext, inputs_paths: tuple[str, ...], alpha: float, gamma: float, q: str, starts: str,
    rel_tol: float | None, max_iter: int | None, structure: str | None, feature: str | None, largest: bool,
    workers: int | None, distances_out: str | None, out_path: str,
) -> None:
    """Pairwise FGW distances turned into an exp(-gamma D) similarity matrix."""
    (measures,), _ = load_measure_groups([inputs_paths], structure, feature, largest)
    params = build_params(ctx, alpha, q, starts, rel_tol, max_iter)
    D = pairwise_fgw_matrix(measures, params, ctx.workers(workers))
    K = fgw_kernel(D, gamma)

    names = list(D.names)
    metadata = {"alpha": D.alpha, "q": D.q, "starts": "+".join(D.starts)}
    _write_matrix(out_path, K, names, {**metadata, "gamma": gamma})
    if distances_out:
        _write_matrix(distances_out, D.values, names, metadata)

    if ctx.json_mode:
        ctx.formatter.json({"names": names, "alpha": alpha, "gamma": gamma, "kernel": K})
        return
    ctx.formatter.matrix(f"FGW kernel (gamma={gamma:g})", K, names)
    ctx.formatter.success(f"Wrote {out_path}")
    if distances_out:
        ctx.formatter.success(f"Wrote {distances_out}")


def _write_matrix(path: str, values: np.ndarray, names: list[str], metadata: dict[str, Any]) -> None:
    if Path(path).suffix.lower() == ".json":
        write_json(path, {**metadata, "names": names, "values": values})
    else:
        write_matrix_csv(path, values, names, metadata)
