"""Options and loaders shared by the graph-reading commands."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, TypeVar

import click

from fgwkit.cli.main import FgwContext
from fgwkit.core.exceptions import MissingLabelsError, ValidationError
from fgwkit.models.graph import LabeledGraph
from fgwkit.models.measure import StructuredMeasure
from fgwkit.models.params import FgwParams, make_params, parse_starts
from fgwkit.services.datasets import (
    FeatureOption,
    StructureKind,
    default_feature_option,
    measures_from_graphs,
    parse_feature_option,
    parse_structure_option,
    read_graph_inputs,
    read_manifest,
)

F = TypeVar("F", bound=Callable[..., Any])

STRUCTURE_CHOICE = click.Choice([k.value for k in StructureKind], case_sensitive=False)


class StartsParamType(click.ParamType):
    """Comma-separated start strategies, normalized to lower case."""

    name = "starts"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> str:
        try:
            return ",".join(s.value for s in parse_starts(str(value).lower()))
        except ValidationError as e:
            self.fail(f"{e} (expected product, wasserstein or gw)", param, ctx)


class FeatureParamType(click.ParamType):
    """``label``, ``wl:H``, ``l2`` or ``none``."""

    name = "feature"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> str:
        try:
            return str(parse_feature_option(str(value)))
        except ValidationError as e:
            self.fail(str(e), param, ctx)


STARTS = StartsParamType()
FEATURE = FeatureParamType()


def alpha_option(f: F) -> F:
    """Required --alpha in [0, 1]; click reports out-of-range values as usage errors."""
    return click.option(
        "--alpha", required=True, type=click.FloatRange(0.0, 1.0),
        help="Trade-off between features (0) and structure (1).",
    )(f)


def solver_options(f: F) -> F:
    """--q, --starts, --tol and --max-iter; tolerance defaults come from the config."""
    for option in reversed([
        click.option("--q", "q", type=click.Choice(["1", "2"]), default="2", show_default=True,
                     help="Exponent of the ground costs."),
        click.option("--starts", type=STARTS, default="product", show_default=True,
                     help="Comma-separated initial couplings: product, wasserstein, gw."),
        click.option("--tol", "rel_tol", type=click.FloatRange(min=0.0, min_open=True), default=None,
                     help="Relative loss decrease that stops the solver."),
        click.option("--max-iter", type=click.IntRange(min=1), default=None, help="Solver iteration cap."),
    ]):
        f = option(f)
    return f


def input_options(f: F) -> F:
    """--structure, --feature and --largest-component; defaults come from a manifest when present."""
    for option in reversed([
        click.option("--structure", type=STRUCTURE_CHOICE, default=None,
                     help="Structure matrix: sp (shortest path) or adj."),
        click.option("--feature", type=FEATURE, default=None, help="Node features: l2, label, wl:H or none."),
        click.option("--largest-component", "largest", is_flag=True,
                     help="Keep only the largest connected component of each graph."),
    ]):
        f = option(f)
    return f


def workers_option(f: F) -> F:
    return click.option(
        "--workers", type=click.IntRange(min=0), default=None,
        help="Parallel worker processes (0 = all cores; default from config).",
    )(f)


def build_params(
    ctx: FgwContext, alpha: float, q: str, starts: str, rel_tol: float | None, max_iter: int | None,
) -> FgwParams:
    return make_params(
        alpha,
        q=int(q),
        max_iter=max_iter if max_iter is not None else int(ctx.setting("solver", "max_iter")),
        rel_tol=rel_tol if rel_tol is not None else float(ctx.setting("solver", "rel_tol")),
        starts=parse_starts(starts),
    )


def resolve_input_options(
    paths: Sequence[str | Path],
    graphs: Sequence[LabeledGraph],
    structure: str | None,
    feature: str | None,
    largest: bool = False,
) -> tuple[StructureKind, FeatureOption, bool]:
    """Explicit flags win; then the first manifest found; then sp with the richest feature the graphs carry.

    A graph file picks up the manifest of the directory it sits in.
    """
    manifest: dict[str, Any] = {}
    for path in paths:
        source = Path(path)
        found = read_manifest(source if source.is_dir() else source.parent)
        if found is not None:
            manifest = found
            break
    structure_text = structure or manifest.get("structure") or StructureKind.SHORTEST_PATH.value
    feature_text = feature or manifest.get("feature")
    feature_option = default_feature_option(graphs) if feature_text is None else parse_feature_option(feature_text)
    return (
        parse_structure_option(structure_text),
        feature_option,
        largest or bool(manifest.get("largest_component", False)),
    )


def load_measure_groups(
    groups: Sequence[Sequence[str | Path]],
    structure: str | None,
    feature: str | None,
    largest: bool,
) -> tuple[list[list[StructuredMeasure]], list[list[LabeledGraph]]]:
    """Read several groups of inputs and convert them together (one WL dictionary for all)."""
    graph_groups = [read_graph_inputs(paths) for paths in groups]
    flat = [g for group in graph_groups for g in group]
    all_paths = [p for paths in groups for p in paths]
    structure_kind, feature_option, largest = resolve_input_options(all_paths, flat, structure, feature, largest)
    measures = measures_from_graphs(flat, structure_kind, feature_option, largest)
    out: list[list[StructuredMeasure]] = []
    start = 0
    for group in graph_groups:
        out.append(measures[start:start + len(group)])
        start += len(group)
    return out, graph_groups


def parse_float_list(text: str, what: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise ValidationError(f"Cannot parse {what} '{text}'.") from e
    if not values:
        raise ValidationError(f"Empty {what} list.")
    return values


def graph_labels(graphs: Sequence[LabeledGraph], role: str) -> list[int]:
    """Graph-level class labels, required for every graph of the given role."""
    missing = [g.name for g in graphs if g.graph_label is None]
    if missing:
        raise MissingLabelsError(f"{role} graph(s) without a 'label': {', '.join(missing[:5])}.")
    return [int(g.graph_label) for g in graphs if g.graph_label is not None]
