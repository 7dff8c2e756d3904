"""Solver parameters."""

from __future__ import annotations

from enum import Enum

from pydantic import Field, field_validator

from fgwkit.core.exceptions import UnsupportedExponentError, ValidationError
from fgwkit.models.base import Array, FgwModel

SUPPORTED_EXPONENTS = (1, 2)


class StartStrategy(str, Enum):
    """Named initial couplings for the conditional-gradient solver."""

    PRODUCT = "product"
    WASSERSTEIN = "wasserstein"
    GW = "gw"


# A start is either a named strategy or an explicit n x m coupling matrix.
Start = StartStrategy | Array


class FgwParams(FgwModel):
    """Parameters of one FGW solve."""

    q: int = 2
    alpha: float
    max_iter: int = Field(default=1000, gt=0)
    rel_tol: float = Field(default=1e-9, gt=0)
    starts: tuple[Start, ...] = (StartStrategy.PRODUCT,)

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {v}")
        return float(v)

    @field_validator("starts")
    @classmethod
    def _check_starts(cls, v: tuple[Start, ...]) -> tuple[Start, ...]:
        if not v:
            raise ValueError("at least one start is required")
        return v

    def start_names(self) -> list[str]:
        """Start strategies as strings (explicit couplings show as 'given')."""
        return [s.value if isinstance(s, StartStrategy) else "given" for s in self.starts]


def make_params(
    alpha: float,
    q: int = 2,
    max_iter: int = 1000,
    rel_tol: float = 1e-9,
    starts: tuple[Start, ...] | list[Start] | None = None,
) -> FgwParams:
    """Build FgwParams, raising fgwkit exceptions instead of pydantic ones."""
    if q not in SUPPORTED_EXPONENTS:
        raise UnsupportedExponentError(f"q must be one of {SUPPORTED_EXPONENTS}, got {q}")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    if max_iter <= 0:
        raise ValidationError(f"max_iter must be positive, got {max_iter}")
    if rel_tol <= 0:
        raise ValidationError(f"rel_tol must be positive, got {rel_tol}")
    parsed = tuple(StartStrategy(s) if isinstance(s, str) else s for s in (starts or [StartStrategy.PRODUCT]))
    return FgwParams(q=q, alpha=alpha, max_iter=max_iter, rel_tol=rel_tol, starts=parsed)


def parse_starts(text: str) -> list[StartStrategy]:
    """Parse a comma-separated list such as 'product,wasserstein'."""
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise ValidationError("empty start list")
    try:
        return [StartStrategy(n) for n in names]
    except ValueError as e:
        raise ValidationError(f"unknown start strategy in '{text}'") from e
