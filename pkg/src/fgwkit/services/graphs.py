"""Graph construction, structure matrices, WL relabeling and permutations."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from fgwkit.core.exceptions import (
    DimensionMismatchError,
    DisconnectedGraphError,
    IndexOutOfRangeError,
    InvalidPermutationError,
    MissingLabelsError,
    NonPositiveWeightError,
    ValidationError,
)
from fgwkit.models.base import frozen_array
from fgwkit.models.graph import LabeledGraph

logger = logging.getLogger(__name__)


def make_graph(
    node_count: int,
    edges: Iterable[tuple[int, int] | Sequence[int]] = (),
    labels: Sequence[int] | None = None,
    attributes: ArrayLike | None = None,
    weights: Sequence[float] | None = None,
    graph_label: int | None = None,
    name: str = "",
) -> LabeledGraph:
    """Validate and normalize raw graph data.

    Edges are undirected: (u, v) and (v, u) collapse into one. Self-loops and
    duplicates are rejected; use ``normalize_edges`` first to drop them.
    """
    if node_count < 0:
        raise ValidationError("node_count must be nonnegative.")
    seen: set[tuple[int, int]] = set()
    for edge in edges:
        u, v = int(edge[0]), int(edge[1])
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise IndexOutOfRangeError(f"Edge ({u}, {v}) has an endpoint outside 0..{node_count - 1}.")
        if u == v:
            raise ValidationError(f"Self-loop on node {u}.")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValidationError(f"Duplicate edge {key}.")
        seen.add(key)

    label_tuple = None
    if labels is not None:
        if len(labels) != node_count:
            raise DimensionMismatchError(f"Got {len(labels)} labels for {node_count} nodes.")
        label_tuple = tuple(int(x) for x in labels)

    attr = None
    if attributes is not None:
        attr = np.asarray(attributes, dtype=np.float64)
        if attr.ndim == 1:
            attr = attr.reshape(-1, 1)
        if attr.ndim != 2 or attr.shape[0] != node_count:
            raise DimensionMismatchError(f"Attributes must have {node_count} rows, got shape {attr.shape}.")
        attr = frozen_array(attr)

    weight_tuple = None
    if weights is not None:
        if len(weights) != node_count:
            raise DimensionMismatchError(f"Got {len(weights)} weights for {node_count} nodes.")
        if any(w <= 0 for w in weights):
            raise NonPositiveWeightError("Node weights must be > 0.")
        weight_tuple = tuple(float(w) for w in weights)

    return LabeledGraph(
        node_count=node_count,
        edges=tuple(sorted(seen)),
        labels=label_tuple,
        attributes=attr,
        weights=weight_tuple,
        graph_label=graph_label,
        name=name,
    )


def normalize_edges(pairs: Iterable[tuple[int, int]]) -> tuple[list[tuple[int, int]], dict[str, int]]:
    """Collapse directions, drop self-loops and duplicates; return counters of what was dropped."""
    listed = [(int(u), int(v)) for u, v in pairs]
    directed = set(listed)
    stats = {"one_directional_edges": 0, "self_loops_dropped": 0, "duplicate_edges": len(listed) - len(directed)}
    undirected: set[tuple[int, int]] = set()
    for u, v in sorted(directed):
        if u == v:
            stats["self_loops_dropped"] += 1
            continue
        key = (min(u, v), max(u, v))
        if (v, u) not in directed:
            stats["one_directional_edges"] += 1
        undirected.add(key)
    return sorted(undirected), stats


# ── Structure matrices ───────────────────────────────────────────


def adjacency_matrix(g: LabeledGraph) -> NDArray[np.float64]:
    """Dense 0/1 adjacency with zero diagonal."""
    A = np.zeros((g.node_count, g.node_count), dtype=np.float64)
    for u, v in g.edges:
        A[u, v] = A[v, u] = 1.0
    return A


def _sparse_adjacency(g: LabeledGraph) -> csr_matrix:
    if not g.edges:
        return csr_matrix((g.node_count, g.node_count), dtype=np.float64)
    rows, cols = zip(*g.edges, strict=True)
    data = np.ones(len(rows), dtype=np.float64)
    return csr_matrix((data, (rows, cols)), shape=(g.node_count, g.node_count))


def graph_components(g: LabeledGraph) -> list[list[int]]:
    """Connected components as sorted node lists, largest first (ties by smallest node)."""
    if g.node_count == 0:
        return []
    _, labels = connected_components(_sparse_adjacency(g), directed=False)
    groups: dict[int, list[int]] = {}
    for node, comp in enumerate(labels.tolist()):
        groups.setdefault(comp, []).append(node)
    return sorted(groups.values(), key=lambda c: (-len(c), c[0]))


def is_connected(g: LabeledGraph) -> bool:
    return len(graph_components(g)) <= 1


def shortest_path_matrix(g: LabeledGraph) -> NDArray[np.float64]:
    """Unweighted hop distances between all node pairs (BFS from every node)."""
    components = graph_components(g)
    if len(components) > 1:
        raise DisconnectedGraphError(components)
    D = shortest_path(_sparse_adjacency(g), method="D", directed=False, unweighted=True)
    return np.asarray(D, dtype=np.float64)


def subgraph(g: LabeledGraph, nodes: Sequence[int]) -> LabeledGraph:
    """Induced subgraph on the given nodes, renumbered in the given order."""
    index = {old: new for new, old in enumerate(nodes)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return make_graph(
        len(nodes),
        edges,
        labels=[g.labels[i] for i in nodes] if g.labels is not None else None,
        attributes=g.attributes[list(nodes)] if g.attributes is not None else None,
        weights=[g.weights[i] for i in nodes] if g.weights is not None else None,
        graph_label=g.graph_label,
        name=g.name,
    )


def largest_component(g: LabeledGraph) -> LabeledGraph:
    """Induced subgraph of the largest connected component (node order kept)."""
    components = graph_components(g)
    if len(components) <= 1:
        return g
    logger.info("graph %s: keeping %d of %d nodes (largest component)", g.name or "?", len(components[0]),
                g.node_count)
    return subgraph(g, components[0])


# ── Weisfeiler-Lehman relabeling ─────────────────────────────────


class WlDictionary:
    """Shared signature -> id tables, one per WL iteration.

    Sharing one dictionary across a dataset makes label ids comparable
    between graphs. Ids are handed out in order of first appearance.
    """

    def __init__(self) -> None:
        self._tables: list[dict[tuple[int, tuple[int, ...]], int]] = []

    def lookup(self, iteration: int, signature: tuple[int, tuple[int, ...]]) -> int:
        while len(self._tables) < iteration:
            self._tables.append({})
        table = self._tables[iteration - 1]
        if signature not in table:
            table[signature] = len(table)
        return table[signature]

    def size(self, iteration: int) -> int:
        return len(self._tables[iteration - 1]) if iteration <= len(self._tables) else 0


def _neighbors(g: LabeledGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(g.node_count)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def wl_relabel(g: LabeledGraph, H: int, dictionary: WlDictionary | None = None) -> NDArray[np.int64]:
    """Per-node sequences of H+1 WL labels (column k = iteration k).

    Iteration 0 holds the original labels; iteration k maps
    (own label at k-1, sorted neighbour labels at k-1) to a canonical id.
    """
    if g.labels is None:
        raise MissingLabelsError(f"Graph {g.name or '?'} has no discrete node labels.")
    if H < 0:
        raise ValidationError(f"WL depth must be >= 0, got {H}.")
    dictionary = dictionary if dictionary is not None else WlDictionary()
    adj = _neighbors(g)
    seq = np.zeros((g.node_count, H + 1), dtype=np.int64)
    seq[:, 0] = g.labels
    for k in range(1, H + 1):
        prev = seq[:, k - 1]
        for node in range(g.node_count):
            signature = (int(prev[node]), tuple(sorted(int(prev[n]) for n in adj[node])))
            seq[node, k] = dictionary.lookup(k, signature)
    return seq


def wl_relabel_many(graphs: Sequence[LabeledGraph], H: int) -> list[NDArray[np.int64]]:
    """Relabel a collection through one shared dictionary, graph by graph in order."""
    dictionary = WlDictionary()
    return [wl_relabel(g, H, dictionary) for g in graphs]


# ── Permutations ─────────────────────────────────────────────────


def check_permutation(sigma: Sequence[int], n: int) -> list[int]:
    perm = [int(s) for s in sigma]
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise InvalidPermutationError(f"Expected a permutation of 0..{n - 1}.")
    return perm


def permutation_matrix(sigma: Sequence[int]) -> NDArray[np.float64]:
    """P with P[sigma[i], i] = 1, so that (P C P^T)[sigma[i], sigma[j]] = C[i, j]."""
    n = len(sigma)
    P = np.zeros((n, n), dtype=np.float64)
    P[list(sigma), list(range(n))] = 1.0
    return P


def permute_graph(g: LabeledGraph, sigma: Sequence[int]) -> LabeledGraph:
    """Move node i to position sigma[i], carrying edges, labels, attributes and weights."""
    perm = check_permutation(sigma, g.node_count)
    inverse = [0] * g.node_count
    for old, new in enumerate(perm):
        inverse[new] = old
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    return make_graph(
        g.node_count,
        edges,
        labels=[g.labels[i] for i in inverse] if g.labels is not None else None,
        attributes=g.attributes[inverse] if g.attributes is not None else None,
        weights=[g.weights[i] for i in inverse] if g.weights is not None else None,
        graph_label=g.graph_label,
        name=g.name,
    )


def random_connected_graph(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.1) -> LabeledGraph:
    """Random recursive tree on n nodes plus independent extra edges."""
    edges: set[tuple[int, int]] = set()
    for node in range(1, n):
        parent = int(rng.integers(0, node))
        edges.add((parent, node))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    return make_graph(n, sorted(edges))

