"""Deterministic result files: JSON with exact floats, CSV matrices.

Floats are written with 17 significant digits so that every value
round-trips bit-exactly; identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fgwkit.core.exceptions import NonFiniteCostError

INDENT = "  "


def format_float(value: float) -> str:
    """17 significant digits; integral values keep a trailing '.0'."""
    if not math.isfinite(value):
        raise NonFiniteCostError(f"Cannot serialize non-finite value {value!r}.")
    text = format(value, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(value: Any, level: int) -> str:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    elif isinstance(value, np.generic):
        value = value.item()
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    pad = INDENT * (level + 1)
    end = INDENT * level
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        # rows of scalars stay on one line so matrices remain readable
        if all(not isinstance(v, (Mapping, list, tuple, np.ndarray)) for v in value):
            return "[" + ", ".join(_encode(v, level + 1) for v in value) + "]"
        items = [f"{pad}{_encode(v, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(value, "value"):  # enums
        return _encode(value.value, level)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def dumps_json(data: Any) -> str:
    """Serialize to JSON text: insertion-ordered keys, 2-space indent, trailing newline."""
    return _encode(data, 0) + "\n"


def write_json(path: str | Path, data: Any) -> Path:
    """Write ``data`` as JSON, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps_json(data), encoding="utf-8")
    return target


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def dumps_table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], metadata: Mapping[str, Any]) -> str:
    """CSV text: a '# key=value ...' line, a header row, then the rows (floats at 17 digits)."""
    buffer = io.StringIO()
    meta = " ".join(f"{k}={v}" for k, v in metadata.items())
    buffer.write(f"# {meta}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_float(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buffer.getvalue()


def dumps_matrix_csv(values: ArrayLike, names: Sequence[str], metadata: Mapping[str, Any]) -> str:
    """Square matrix as CSV with graph names on the header and in the first column."""
    M = np.asarray(values, dtype=np.float64)
    rows = [[name, *(float(x) for x in row)] for name, row in zip(names, M, strict=True)]
    return dumps_table_csv(["name", *names], rows, metadata)


def write_matrix_csv(path: str | Path, values: ArrayLike, names: Sequence[str], metadata: Mapping[str, Any]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps_matrix_csv(values, names, metadata), encoding="utf-8")
    return target


def read_matrix_csv(path: str | Path) -> tuple[NDArray[np.float64], list[str], dict[str, str]]:
    """Inverse of ``write_matrix_csv``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    metadata: dict[str, str] = {}
    if lines and lines[0].startswith("#"):
        for token in lines[0][1:].split():
            key, _, val = token.partition("=")
            metadata[key] = val
        lines = lines[1:]
    rows = list(csv.reader(lines))
    names = rows[0][1:]
    values = np.array([[float(x) for x in row[1:]] for row in rows[1:]], dtype=np.float64)
    return values, names, metadata
