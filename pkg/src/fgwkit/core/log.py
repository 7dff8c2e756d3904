"""Logging setup: one Rich handler on stderr, level from FGWKIT_LOG_LEVEL."""

from __future__ import annotations

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

LOG_LEVEL_ENV = "FGWKIT_LOG_LEVEL"

_handler: RichHandler | None = None


def resolve_level(verbosity: int = 0) -> int:
    """Map the environment variable and -v count to a logging level."""
    if verbosity >= 2:
        return logging.DEBUG
    if verbosity == 1:
        return logging.INFO
    name = os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING


def setup_logging(verbosity: int = 0) -> None:
    """Attach the stderr handler to the package logger (idempotent)."""
    global _handler
    logger = logging.getLogger("fgwkit")
    if _handler is None:
        _handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            rich_tracebacks=False,
        )
        _handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(_handler)
        logger.propagate = False
    logger.setLevel(resolve_level(verbosity))
