"""Synthetic dataset generators: reference trees and SBM community graphs."""

from __future__ import annotations

from pathlib import Path

import click

from fgwkit.cli.main import FgwContext, JsonGroup, pass_context
from fgwkit.output.files import write_json
from fgwkit.services.datasets import write_graph_dir, write_graph_json
from fgwkit.services.generators import gen_reference_trees, gen_sbm_dataset


def _parse_groups(text: str) -> int | list[int]:
    """'4' means four groups with 1..4 communities; '1,3,5' lists community counts."""
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected an integer or a comma-separated list, got '{text}'.") from e
    if not values:
        raise click.BadParameter("empty group specification.")
    return values[0] if "," not in text else values


@click.group(cls=JsonGroup)
@pass_context
def gen(ctx: FgwContext) -> None:
    """Generate synthetic graph datasets."""
    pass


@gen.command("trees")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Output directory.")
@pass_context
def gen_trees(ctx: FgwContext, out_dir: str) -> None:
    """Two same-shape binary trees with differently arranged leaf features."""
    tree_a, tree_b, isomorphism = gen_reference_trees()
    root = Path(out_dir)
    written = [write_graph_json(tree_a, root / "tree_a.json"), write_graph_json(tree_b, root / "tree_b.json")]
    written.append(write_json(root / "isomorphism.json", {"permutation": isomorphism}))

    if ctx.json_mode:
        ctx.formatter.json({"files": [str(p) for p in written], "nodes": tree_a.node_count})
        return
    for path in written:
        ctx.formatter.success(f"Wrote {path}")


@gen.command("sbm")
@click.option("--groups", "groups_spec", default="4", show_default=True,
              help="Group count, or comma-separated community counts per group.")
@click.option("--per-group", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--p-in", type=click.FloatRange(0.0, 1.0), default=None, help="Within-community edge probability.")
@click.option("--p-out", type=click.FloatRange(0.0, 1.0), default=None, help="Between-community edge probability.")
@click.option("--label-noise", type=click.FloatRange(min=0.0), default=None, help="Uniform attribute noise.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Output directory.")
@pass_context
def gen_sbm(
    ctx: FgwContext, groups_spec: str, per_group: int, seed: int, p_in: float | None, p_out: float | None,
    label_noise: float | None, out_dir: str,
) -> None:
    """Stochastic block model graphs labelled by their group."""
    groups = _parse_groups(groups_spec)
    p_in = p_in if p_in is not None else float(ctx.setting("sbm", "p_in"))
    p_out = p_out if p_out is not None else float(ctx.setting("sbm", "p_out"))
    label_noise = label_noise if label_noise is not None else float(ctx.setting("sbm", "label_noise"))
    graphs = gen_sbm_dataset(groups, per_group, seed, p_in=p_in, p_out=p_out, label_noise=label_noise)
    manifest = {
        "name": "sbm",
        "structure": "sp",
        "feature": "l2",
        "graph_count": len(graphs),
        "seed": seed,
        "groups": groups,
        "per_group": per_group,
        "p_in": p_in,
        "p_out": p_out,
        "label_noise": label_noise,
    }
    write_graph_dir(graphs, out_dir, manifest)

    if ctx.json_mode:
        ctx.formatter.json({"directory": out_dir, "graph_count": len(graphs)})
        return
    ctx.formatter.success(f"Wrote {len(graphs)} graphs to {out_dir}")
