"""Raw graph models and the JSON graph document schema."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from fgwkit.models.base import Array, FgwModel


class LabeledGraph(FgwModel):
    """An undirected graph with optional discrete labels, vector attributes and node weights.

    ``edges`` holds each undirected edge once as (u, v) with u < v, sorted.
    Build instances with ``fgwkit.services.graphs.make_graph``, which
    enforces the invariants.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...] = ()
    labels: tuple[int, ...] | None = None
    attributes: Array | None = None
    weights: tuple[float, ...] | None = None
    graph_label: int | None = None
    name: str = ""

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def has_attributes(self) -> bool:
        return self.attributes is not None


class SbmSpec(FgwModel):
    """Stochastic block model parameters for one graph."""

    communities: int
    nodes: int
    p_in: float
    p_out: float
    label_means: tuple[float, ...]
    label_noise: float = 0.0
    seed: int = 0


class ParseReport(FgwModel):
    """Counters collected while parsing a dataset."""

    one_directional_edges: int = 0
    self_loops_dropped: int = 0
    duplicate_edges: int = 0


class GraphDataset(FgwModel):
    """A named collection of graphs with one class label per graph."""

    name: str
    graphs: tuple[LabeledGraph, ...]
    graph_labels: tuple[int, ...]
    has_node_labels: bool = False
    has_node_attributes: bool = False
    report: ParseReport = Field(default_factory=ParseReport)

    def __len__(self) -> int:
        return len(self.graphs)


# ── JSON documents ───────────────────────────────────────────────


class NodeDocument(BaseModel):
    """One node of the JSON graph schema."""

    model_config = ConfigDict(extra="forbid")

    id: int
    label: int | None = None
    attributes: list[float] | None = None
    weight: float | None = Field(default=None, gt=0)


class GraphDocument(BaseModel):
    """The JSON graph schema consumed and emitted by the CLI."""

    model_config = ConfigDict(extra="forbid")

    nodes: list[NodeDocument]
    edges: list[tuple[int, int]] = Field(default_factory=list)
    label: int | None = None
