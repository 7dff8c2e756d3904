"""Synthetic graphs: the two reference trees and stochastic block models."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import networkx as nx
import numpy as np

from fgwkit.core.exceptions import ConnectivityRetriesExceededError, SpecInvalidError
from fgwkit.models.graph import LabeledGraph, SbmSpec
from fgwkit.services.graphs import make_graph

logger = logging.getLogger(__name__)

RED = 0.0
BLUE = 10.0
INTERNAL = 5.0
TREE_DEPTH = 3
MAX_CONNECTIVITY_RETRIES = 100
SBM_NODE_CHOICES = (20, 30, 40, 50)


def _binary_tree_edges(depth: int) -> tuple[int, list[tuple[int, int]]]:
    # heap numbering: children of i are 2i+1 and 2i+2
    n = 2 ** (depth + 1) - 1
    edges = [(i, child) for i in range(n) for child in (2 * i + 1, 2 * i + 2) if child < n]
    return n, edges


def gen_reference_trees() -> tuple[LabeledGraph, LabeledGraph, list[int]]:
    """Two depth-3 binary trees with equal feature multisets but different leaf arrangements.

    Tree A puts same-colour leaves under each depth-2 node (blue pair, red
    pair, blue pair, red pair); tree B alternates blue/red under each one.
    Internal nodes carry the same value in both trees, so the trees are
    indistinguishable by features alone or by structure alone. The identity
    is returned as the structure isomorphism.
    """
    n, edges = _binary_tree_edges(TREE_DEPTH)
    first_leaf = 2**TREE_DEPTH - 1
    leaves_a = [BLUE, BLUE, RED, RED, BLUE, BLUE, RED, RED]
    leaves_b = [BLUE, RED] * 4
    internal = [INTERNAL] * first_leaf
    tree_a = make_graph(n, edges, attributes=np.array(internal + leaves_a).reshape(-1, 1), name="tree_a")
    tree_b = make_graph(n, edges, attributes=np.array(internal + leaves_b).reshape(-1, 1), name="tree_b")
    return tree_a, tree_b, list(range(n))


def validate_sbm_spec(spec: SbmSpec) -> None:
    if spec.communities < 1:
        raise SpecInvalidError("An SBM needs at least one community.")
    if spec.nodes < spec.communities:
        raise SpecInvalidError(f"{spec.nodes} nodes cannot hold {spec.communities} communities.")
    if not 0.0 <= spec.p_out < spec.p_in <= 1.0:
        raise SpecInvalidError(f"Need 0 <= p_out < p_in <= 1, got p_in={spec.p_in}, p_out={spec.p_out}.")
    if len(spec.label_means) != spec.communities:
        raise SpecInvalidError(f"Need one label mean per community, got {len(spec.label_means)}.")
    if spec.label_noise < 0:
        raise SpecInvalidError("label_noise must be nonnegative.")


def community_sizes(nodes: int, communities: int) -> list[int]:
    """Equal split, the remainder going to the first communities."""
    sizes = [nodes // communities] * communities
    for i in range(nodes % communities):
        sizes[i] += 1
    return sizes


def gen_sbm(spec: SbmSpec, graph_label: int | None = None, name: str = "") -> LabeledGraph:
    """Sample a connected SBM graph with 1-D attributes around per-community means."""
    validate_sbm_spec(spec)
    rng = np.random.default_rng(spec.seed)
    sizes = community_sizes(spec.nodes, spec.communities)
    probs = np.full((spec.communities, spec.communities), spec.p_out)
    np.fill_diagonal(probs, spec.p_in)

    for attempt in range(MAX_CONNECTIVITY_RETRIES):
        sample = nx.stochastic_block_model(sizes, probs.tolist(), seed=int(rng.integers(2**31 - 1)))
        if nx.is_connected(sample):
            break
        logger.debug("SBM seed %d attempt %d disconnected, resampling", spec.seed, attempt)
    else:
        raise ConnectivityRetriesExceededError(
            f"No connected SBM sample after {MAX_CONNECTIVITY_RETRIES} attempts "
            f"(communities={spec.communities}, p_in={spec.p_in}, p_out={spec.p_out})."
        )

    blocks = np.repeat(np.arange(spec.communities), sizes)
    means = np.asarray(spec.label_means, dtype=np.float64)[blocks]
    noise = rng.uniform(-spec.label_noise, spec.label_noise, size=spec.nodes) if spec.label_noise > 0 else 0.0
    edges = sorted((min(u, v), max(u, v)) for u, v in sample.edges())
    return make_graph(spec.nodes, edges, attributes=(means + noise).reshape(-1, 1),
                      graph_label=graph_label, name=name)


def group_label_means(communities: int) -> tuple[float, ...]:
    """Alternating +/- means whose magnitude identifies the group."""
    return tuple(float(communities) * (-1.0) ** j for j in range(communities))


def gen_sbm_dataset(
    groups: int | Sequence[int] = 4,
    per_group: int = 10,
    seed: int = 0,
    p_in: float = 0.8,
    p_out: float = 0.05,
    label_noise: float = 0.5,
    node_choices: Sequence[int] = SBM_NODE_CHOICES,
) -> list[LabeledGraph]:
    """Community-graph dataset: by default group k holds graphs with k+1 communities.

    ``groups`` is either a group count or the community count of each group.
    Node counts are drawn uniformly from ``node_choices``; ``graph_label``
    records the group index.
    """
    counts = list(range(1, groups + 1)) if isinstance(groups, int) else [int(c) for c in groups]
    if not counts or min(counts) < 1 or per_group < 1:
        raise SpecInvalidError("groups, per_group and community counts must be positive.")
    rng = np.random.default_rng(seed)
    graphs: list[LabeledGraph] = []
    for group, communities in enumerate(counts):
        for index in range(per_group):
            spec = SbmSpec(
                communities=communities,
                nodes=int(rng.choice(np.asarray(node_choices))),
                p_in=p_in,
                p_out=p_out,
                label_means=group_label_means(communities),
                label_noise=label_noise,
                seed=int(rng.integers(2**31 - 1)),
            )
            graphs.append(gen_sbm(spec, graph_label=group, name=f"sbm_g{group}_{index:02d}"))
    return graphs
