"""Shared fixtures: temporary directories and random structured measures."""

from __future__ import annotations

import tempfile
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest

from fgwkit.models.measure import StructuredMeasure
from fgwkit.services.graphs import random_connected_graph, shortest_path_matrix
from fgwkit.services.measures import build_measure

ASSETS = Path(__file__).parent / "assets"


@pytest.fixture
def tmp_dir() -> Iterator[Path]:
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)


@pytest.fixture
def config_dir(tmp_dir: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Point the config lookup at an empty temporary directory."""
    target = tmp_dir / "config"
    monkeypatch.setenv("FGWKIT_CONFIG_DIR", str(target))
    return target


def random_measure(rng: np.random.Generator, n: int, d: int = 1, name: str = "") -> StructuredMeasure:
    """Connected random graph with shortest-path structure and Gaussian features."""
    g = random_connected_graph(n, rng, extra_edge_prob=0.2)
    return build_measure(None, rng.normal(size=(n, d)), shortest_path_matrix(g), name=name)


@pytest.fixture
def make_measure() -> Callable[..., StructuredMeasure]:
    return random_measure
