"""Base model for fgwkit domain objects."""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict

# Field annotation for numpy arrays inside models (pydantic checks isinstance only).
Array = np.ndarray  # type: ignore[type-arg]


def frozen_array(values: ArrayLike, dtype: Any = np.float64) -> NDArray[Any]:
    """Copy values into a read-only contiguous array."""
    arr = np.array(values, dtype=dtype, copy=True)
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class FgwModel(BaseModel):
    """Base for all fgwkit models.

    Models are immutable once built; array fields hold read-only numpy arrays.
    Validation of mathematical invariants lives in the service constructors
    (``build_measure``, ``make_graph``...), which raise fgwkit exceptions.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def to_dict(self) -> dict[str, Any]:
        """Convert to plain Python types (arrays become nested lists)."""
        return _plain(self.model_dump())


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value
