"""Graph datasets: the benchmark text format, JSON graph documents and conversion to measures."""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Sequence
from enum import Enum
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
import pydantic
from numpy.typing import NDArray

from fgwkit.core.exceptions import (
    FeatureModeUnavailableError,
    InconsistentCountsError,
    IndexOutOfRangeError,
    MalformedLineError,
    MissingFileError,
    SchemaError,
    ValidationError,
)
from fgwkit.models.base import FgwModel
from fgwkit.models.graph import GraphDataset, GraphDocument, LabeledGraph, NodeDocument, ParseReport
from fgwkit.models.measure import FeatureMode, StructuredMeasure
from fgwkit.output.files import read_json, write_json
from fgwkit.services.graphs import (
    adjacency_matrix,
    largest_component,
    make_graph,
    normalize_edges,
    shortest_path_matrix,
    wl_relabel_many,
)
from fgwkit.services.measures import build_measure

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

T = TypeVar("T")


class StructureKind(str, Enum):
    """How the structure matrix C is derived from a graph."""

    SHORTEST_PATH = "sp"
    ADJACENCY = "adj"


class FeatureKind(str, Enum):
    """Which node payload becomes the measure's features."""

    LABEL = "label"  # raw discrete labels (WL with depth 0)
    WL = "wl"  # WL label sequences of depth H
    L2 = "l2"  # vector attributes compared with the l2 norm
    NONE = "none"  # one constant feature; only the structure discriminates


class FeatureOption(FgwModel):
    """Parsed ``--feature`` value: ``label``, ``wl:H``, ``l2`` or ``none``."""

    kind: FeatureKind
    depth: int = 0

    def __str__(self) -> str:
        return f"wl:{self.depth}" if self.kind is FeatureKind.WL else self.kind.value


def parse_feature_option(text: str) -> FeatureOption:
    raw = text.strip().lower()
    if raw.startswith("wl:"):
        try:
            depth = int(raw[3:])
        except ValueError as e:
            raise ValidationError(f"Bad WL depth in '{text}'.") from e
        if depth < 0:
            raise ValidationError(f"WL depth must be >= 0, got {depth}.")
        return FeatureOption(kind=FeatureKind.WL, depth=depth)
    try:
        kind = FeatureKind(raw)
    except ValueError as e:
        raise ValidationError(f"Unknown feature option '{text}' (expected label, wl:H, l2 or none).") from e
    if kind is FeatureKind.WL:
        raise ValidationError("WL features need a depth, e.g. wl:2.")
    return FeatureOption(kind=kind)


def parse_structure_option(text: str) -> StructureKind:
    try:
        return StructureKind(text.strip().lower())
    except ValueError as e:
        raise ValidationError(f"Unknown structure option '{text}' (expected sp or adj).") from e


# ── Benchmark text format ────────────────────────────────────────


def _read_rows(path: Path, parse: Callable[[str], T]) -> list[list[T]]:
    """Comma-separated rows; trailing blank lines are ignored, interior ones are not."""
    if not path.is_file():
        raise MissingFileError(f"Missing dataset file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    rows: list[list[T]] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            raise MalformedLineError(str(path), line_no, "blank line")
        try:
            rows.append([parse(cell.strip()) for cell in line.split(",")])
        except ValueError as e:
            raise MalformedLineError(str(path), line_no, f"cannot parse '{line.strip()}'") from e
    return rows


def _single_column(path: Path, rows: list[list[int]]) -> list[int]:
    for line_no, row in enumerate(rows, start=1):
        if len(row) != 1:
            raise MalformedLineError(str(path), line_no, f"expected one value, got {len(row)}")
    return [row[0] for row in rows]


def _graph_offsets(path: Path, indicator: list[int]) -> list[int]:
    """Start offset of each graph's node block; blocks must be contiguous and ordered."""
    offsets: list[int] = []
    expected = 1
    for node, gid in enumerate(indicator):
        if gid == expected:
            offsets.append(node)
            expected += 1
        elif gid != expected - 1:
            raise InconsistentCountsError(
                f"{path}:{node + 1}: graph id {gid} breaks the contiguous 1..G ordering."
            )
    return offsets


def parse_tudataset(directory: str | Path, name: str) -> GraphDataset:
    """Parse ``{name}_A.txt``, ``_graph_indicator.txt``, ``_graph_labels.txt`` and optional node files.

    Node ids in the files are 1-based and global; the result uses 0-based
    ids per graph. Edges listed in one direction only are symmetrized and
    counted in the parse report.
    """
    root = Path(directory)
    indicator_path = root / f"{name}_graph_indicator.txt"
    edges_path = root / f"{name}_A.txt"
    glabels_path = root / f"{name}_graph_labels.txt"
    nlabels_path = root / f"{name}_node_labels.txt"
    attrs_path = root / f"{name}_node_attributes.txt"

    indicator = _single_column(indicator_path, _read_rows(indicator_path, int))
    if not indicator:
        raise InconsistentCountsError(f"{indicator_path} lists no nodes.")
    offsets = _graph_offsets(indicator_path, indicator)
    n_total = len(indicator)
    n_graphs = len(offsets)
    bounds = [*offsets, n_total]

    graph_labels = _single_column(glabels_path, _read_rows(glabels_path, int))
    if len(graph_labels) != n_graphs:
        raise InconsistentCountsError(f"{glabels_path} has {len(graph_labels)} labels for {n_graphs} graphs.")

    node_labels: list[int] | None = None
    if nlabels_path.is_file():
        node_labels = _single_column(nlabels_path, _read_rows(nlabels_path, int))
        if len(node_labels) != n_total:
            raise InconsistentCountsError(f"{nlabels_path} has {len(node_labels)} rows for {n_total} nodes.")

    attributes: NDArray[np.float64] | None = None
    if attrs_path.is_file():
        attr_rows = _read_rows(attrs_path, float)
        if len(attr_rows) != n_total:
            raise InconsistentCountsError(f"{attrs_path} has {len(attr_rows)} rows for {n_total} nodes.")
        widths = {len(r) for r in attr_rows}
        if len(widths) != 1:
            raise InconsistentCountsError(f"{attrs_path} rows have differing widths {sorted(widths)}.")
        attributes = np.asarray(attr_rows, dtype=np.float64)

    pairs: list[tuple[int, int]] = []
    for line_no, row in enumerate(_read_rows(edges_path, int), start=1):
        if len(row) != 2:
            raise MalformedLineError(str(edges_path), line_no, f"expected 2 node ids, got {len(row)}")
        u, v = row
        for node in (u, v):
            if not 1 <= node <= n_total:
                raise IndexOutOfRangeError(f"{edges_path}:{line_no}: node id {node} outside 1..{n_total}.")
        if indicator[u - 1] != indicator[v - 1]:
            raise InconsistentCountsError(f"{edges_path}:{line_no}: edge ({u}, {v}) joins two graphs.")
        pairs.append((u - 1, v - 1))

    edges, stats = normalize_edges(pairs)
    report = ParseReport(**stats)
    if report.one_directional_edges:
        logger.warning("%s: %d edges listed in one direction only, symmetrized", name, report.one_directional_edges)
    if report.self_loops_dropped:
        logger.warning("%s: dropped %d self-loops", name, report.self_loops_dropped)

    per_graph: list[list[tuple[int, int]]] = [[] for _ in range(n_graphs)]
    for u, v in edges:
        per_graph[indicator[u] - 1].append((u, v))

    graphs: list[LabeledGraph] = []
    for index in range(n_graphs):
        start, stop = bounds[index], bounds[index + 1]
        graphs.append(
            make_graph(
                stop - start,
                [(u - start, v - start) for u, v in per_graph[index]],
                labels=node_labels[start:stop] if node_labels is not None else None,
                attributes=attributes[start:stop] if attributes is not None else None,
                graph_label=graph_labels[index],
                name=f"{name}_{index:04d}",
            )
        )

    logger.info("parsed %s: %d graphs, %d nodes, %d edges", name, n_graphs, n_total, len(edges))
    return GraphDataset(
        name=name,
        graphs=tuple(graphs),
        graph_labels=tuple(graph_labels),
        has_node_labels=node_labels is not None,
        has_node_attributes=attributes is not None,
        report=report,
    )


# ── Conversion to measures ───────────────────────────────────────


def _structure(g: LabeledGraph, kind: StructureKind) -> NDArray[np.float64]:
    if kind is StructureKind.SHORTEST_PATH:
        return shortest_path_matrix(g)
    return adjacency_matrix(g)


def measures_from_graphs(
    graphs: Sequence[LabeledGraph],
    structure: StructureKind | str = StructureKind.SHORTEST_PATH,
    features: FeatureOption | str = "l2",
    largest: bool = False,
) -> list[StructuredMeasure]:
    """Convert graphs to measures; WL labels share one dictionary across the collection.

    Node weights come from the graphs when present, uniform otherwise.
    """
    kind = StructureKind(structure)
    option = features if isinstance(features, FeatureOption) else parse_feature_option(features)
    prepared = [largest_component(g) if largest else g for g in graphs]

    if option.kind is FeatureKind.L2:
        missing = [g.name or str(i) for i, g in enumerate(prepared) if g.attributes is None]
        if missing:
            raise FeatureModeUnavailableError(f"No vector attributes on graph(s): {', '.join(missing[:5])}.")
        payloads: list[Any] = [g.attributes for g in prepared]
        mode = FeatureMode.EUCLIDEAN
    elif option.kind is FeatureKind.NONE:
        payloads = [np.zeros((g.node_count, 1)) for g in prepared]
        mode = FeatureMode.EUCLIDEAN
    else:
        missing = [g.name or str(i) for i, g in enumerate(prepared) if g.labels is None]
        if missing:
            raise FeatureModeUnavailableError(f"No discrete labels on graph(s): {', '.join(missing[:5])}.")
        payloads = wl_relabel_many(prepared, option.depth)
        mode = FeatureMode.WL

    return [
        build_measure(g.weights, payload, _structure(g, kind), feature_mode=mode, name=g.name)
        for g, payload in zip(prepared, payloads, strict=True)
    ]


def default_feature_option(graphs: Sequence[LabeledGraph]) -> FeatureOption:
    """l2 when every graph has attributes, label when every graph has labels, none otherwise."""
    if graphs and all(g.attributes is not None for g in graphs):
        return FeatureOption(kind=FeatureKind.L2)
    if graphs and all(g.labels is not None for g in graphs):
        return FeatureOption(kind=FeatureKind.LABEL)
    return FeatureOption(kind=FeatureKind.NONE)


def measures_from_dataset(
    ds: GraphDataset,
    structure: StructureKind | str = StructureKind.SHORTEST_PATH,
    features: FeatureOption | str = "label",
    largest: bool = False,
) -> list[StructuredMeasure]:
    return measures_from_graphs(ds.graphs, structure, features, largest)


# ── JSON graph documents ─────────────────────────────────────────


def graph_to_document(g: LabeledGraph) -> GraphDocument:
    nodes = [
        NodeDocument(
            id=i,
            label=g.labels[i] if g.labels is not None else None,
            attributes=[float(x) for x in g.attributes[i]] if g.attributes is not None else None,
            weight=g.weights[i] if g.weights is not None else None,
        )
        for i in range(g.node_count)
    ]
    return GraphDocument(nodes=nodes, edges=list(g.edges), label=g.graph_label)


def _all_or_none(values: list[Any], field: str) -> bool:
    present = [v is not None for v in values]
    if any(present) and not all(present):
        raise SchemaError(f"Field '{field}' must be given on every node or on none.")
    return all(present) and bool(values)


def document_to_graph(doc: GraphDocument, name: str = "") -> LabeledGraph:
    """Node index = position in the ``nodes`` array; edges reference node ids."""
    index: dict[int, int] = {}
    for position, node in enumerate(doc.nodes):
        if node.id in index:
            raise SchemaError(f"Duplicate node id {node.id}.")
        index[node.id] = position

    edges: list[tuple[int, int]] = []
    for u, v in doc.edges:
        if u not in index or v not in index:
            raise IndexOutOfRangeError(f"Edge ({u}, {v}) references an unknown node id.")
        edges.append((index[u], index[v]))

    labels = [n.label for n in doc.nodes]
    attrs = [n.attributes for n in doc.nodes]
    weights = [n.weight for n in doc.nodes]
    has_attrs = _all_or_none(attrs, "attributes")
    if has_attrs and len({len(a) for a in attrs if a is not None}) != 1:
        raise SchemaError("All node attribute vectors must have the same length.")

    return make_graph(
        len(doc.nodes),
        edges,
        labels=[int(x) for x in labels if x is not None] if _all_or_none(labels, "label") else None,
        attributes=np.asarray(attrs, dtype=np.float64) if has_attrs else None,
        weights=[float(w) for w in weights if w is not None] if _all_or_none(weights, "weight") else None,
        graph_label=doc.label,
        name=name,
    )


def read_graph_json(path: str | Path) -> LabeledGraph:
    source = Path(path)
    if not source.is_file():
        raise MissingFileError(f"Graph file not found: {source}")
    try:
        doc = GraphDocument.model_validate(json.loads(source.read_text(encoding="utf-8")))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{source}: invalid JSON ({e.msg} at line {e.lineno}).") from e
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise SchemaError(f"{source}: {where}: {first['msg']}.") from e
    return document_to_graph(doc, name=source.stem)


def write_graph_json(g: LabeledGraph, path: str | Path) -> Path:
    doc = graph_to_document(g)
    return write_json(path, doc.model_dump(exclude_none=True))


def list_graph_files(directory: str | Path) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise MissingFileError(f"Graph directory not found: {root}")
    return sorted(p for p in root.glob("*.json") if p.name != MANIFEST_NAME)


def read_graph_dir(directory: str | Path) -> list[LabeledGraph]:
    """All ``*.json`` graphs of a directory in file-name order (the manifest is skipped)."""
    files = list_graph_files(directory)
    if not files:
        raise MissingFileError(f"No graph files in {directory}.")
    return [read_graph_json(p) for p in files]


def read_graph_inputs(paths: Sequence[str | Path]) -> list[LabeledGraph]:
    """Graphs from a mix of directories and single files, in the given order."""
    graphs: list[LabeledGraph] = []
    for path in paths:
        graphs.extend(read_graph_dir(path) if Path(path).is_dir() else [read_graph_json(path)])
    return graphs


def write_graph_dir(
    graphs: Sequence[LabeledGraph],
    directory: str | Path,
    manifest: dict[str, Any] | None = None,
) -> list[Path]:
    """One ``<name>.json`` per graph plus an optional manifest."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = [write_graph_json(g, root / f"{g.name or f'graph_{i:04d}'}.json") for i, g in enumerate(graphs)]
    if manifest is not None:
        write_json(root / MANIFEST_NAME, {**manifest, "graphs": [p.name for p in written]})
    return written


def read_manifest(directory: str | Path) -> dict[str, Any] | None:
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        return None
    try:
        data = read_json(path)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e.msg}).") from e
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a JSON object.")
    return data


def dataset_manifest(ds: GraphDataset, structure: StructureKind, features: FeatureOption) -> dict[str, Any]:
    return {
        "name": ds.name,
        "structure": structure.value,
        "feature": str(features),
        "graph_count": len(ds.graphs),
        "has_node_labels": ds.has_node_labels,
        "has_node_attributes": ds.has_node_attributes,
        "report": ds.report.to_dict(),
    }
