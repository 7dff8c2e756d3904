"""Dual-mode output: Rich for humans, JSON for scripts and agents."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from rich.console import Console
from rich.table import Table

from fgwkit.output.files import dumps_json

# Human output goes to stdout; in JSON mode, human messages go to stderr
_console = Console()
_err_console = Console(stderr=True)

MAX_MATRIX_PREVIEW = 12


class OutputFormatter:
    """Routes output to Rich (human) or JSON (agent) depending on mode."""

    def __init__(self, json_mode: bool = False) -> None:
        self.json_mode = json_mode

    # ── JSON output ──────────────────────────────────────────────

    def json(self, data: Any, status: str = "success") -> None:
        """Print a ``{"status", "data"}`` envelope to stdout."""
        print(dumps_json({"status": status, "data": data}), end="")

    def json_error(self, message: str, code: int) -> None:
        print(dumps_json({"status": "error", "error": {"message": message, "code": code}}), end="")

    # ── Human output ─────────────────────────────────────────────

    def success(self, message: str) -> None:
        if self.json_mode:
            return
        _console.print(f"[green]✓[/green] {message}")

    def warning(self, message: str) -> None:
        _err_console.print(f"[yellow]![/yellow] {message}")

    def info(self, message: str) -> None:
        if self.json_mode:
            return
        _console.print(f"[dim]ℹ[/dim] {message}")

    def summary(self, title: str, values: Mapping[str, Any]) -> None:
        """Key/value result summary; in JSON mode the mapping is the payload."""
        if self.json_mode:
            self.json(dict(values))
            return
        table = Table(title=title, show_header=False, title_style="bold cyan")
        table.add_column("key", style="bold")
        table.add_column("value")
        for key, value in values.items():
            table.add_row(key, format_value(value))
        _console.print(table)

    def table(
        self,
        title: str,
        columns: list[tuple[str, str]],
        rows: list[list[str]],
    ) -> None:
        """Print a table (Rich for humans, JSON for agents).

        columns: list of (header, style) tuples
        """
        if self.json_mode:
            self.json([dict(zip([c[0] for c in columns], r, strict=True)) for r in rows])
            return
        table = Table(title=title, show_header=True, header_style="bold cyan")
        for header, style in columns:
            table.add_column(header, style=style)
        for row in rows:
            table.add_row(*row)
        _console.print(table)

    def matrix(self, title: str, values: ArrayLike, names: Sequence[str]) -> None:
        """Preview a square matrix (top-left corner only for large ones)."""
        if self.json_mode:
            return
        M = np.asarray(values, dtype=np.float64)
        shown = min(len(names), MAX_MATRIX_PREVIEW)
        table = Table(title=title, show_header=True, header_style="bold cyan")
        table.add_column("", style="bold")
        for name in names[:shown]:
            table.add_column(name, justify="right")
        for i in range(shown):
            table.add_row(names[i], *(f"{M[i, j]:.4g}" for j in range(shown)))
        _console.print(table)
        if shown < len(names):
            _console.print(f"[dim]… {len(names) - shown} more rows/columns in the output file[/dim]")


def format_value(value: Any) -> str:
    """Compact human rendering of a scalar result."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)
