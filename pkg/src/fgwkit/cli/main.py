"""Root CLI group: entry point for all fgw commands."""

from __future__ import annotations

from typing import Any

import click

from fgwkit import __version__
from fgwkit.core.exceptions import FgwError, NumericalError
from fgwkit.core.log import setup_logging
from fgwkit.output.formatter import OutputFormatter

EXIT_INPUT = 3
EXIT_NUMERICAL = 4


class FgwContext:
    """Shared context passed through Click commands."""

    def __init__(self, json_mode: bool = False, verbosity: int = 0) -> None:
        self.json_mode = json_mode
        self.verbosity = verbosity
        self.formatter = OutputFormatter(json_mode=json_mode)
        self._config: dict[str, Any] | None = None

    @property
    def config(self) -> dict[str, Any]:
        """Lazy-load the merged TOML config (never creates files)."""
        if self._config is None:
            from fgwkit.core.config import load_config

            self._config = load_config()
        return self._config

    def setting(self, section: str, key: str) -> Any:
        from fgwkit.core.config import get_setting

        return get_setting(self.config, section, key)

    def workers(self, requested: int | None) -> int:
        from fgwkit.core.config import resolve_workers

        return resolve_workers(self.config, requested)


pass_context = click.make_pass_decorator(FgwContext, ensure=True)


def _json_callback(ctx: click.Context, param: click.Parameter, value: bool) -> bool:
    """Eager callback to set JSON mode on the FgwContext."""
    if value:
        fgw_ctx = ctx.find_object(FgwContext)
        if fgw_ctx:
            fgw_ctx.json_mode = True
            fgw_ctx.formatter.json_mode = True
    return value


class JsonGroup(click.Group):
    """Click Group subclass that adds --json flag automatically.

    Allows `fgw gen --json trees` in addition to `fgw --json gen trees`.
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.params.insert(0, click.Option(
            ["--json"], "json_mode", is_flag=True, default=False,
            help="Output JSON for agent consumption.",
            expose_value=False, is_eager=True,
            callback=_json_callback,
        ))


class FgwGroup(click.Group):
    """Root group: turns fgwkit errors into one stderr line and an exit code.

    Input and parse errors exit with 3, numerical failures with 4; click
    usage errors keep their own exit code 2.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except FgwError as e:
            code = EXIT_NUMERICAL if isinstance(e, NumericalError) else EXIT_INPUT
            fgw_ctx = ctx.find_object(FgwContext)
            if fgw_ctx is not None and fgw_ctx.json_mode:
                fgw_ctx.formatter.json_error(str(e), code)
            click.echo(f"Error: {e}", err=True)
            ctx.exit(code)


@click.group(cls=FgwGroup)
@click.option("--json", "json_mode", is_flag=True, help="Output JSON for agent consumption.")
@click.option("-v", "--verbose", "verbosity", count=True, help="Log progress to stderr (-vv for debug).")
@click.version_option(__version__, prog_name="fgwkit")
@click.pass_context
def cli(ctx: click.Context, json_mode: bool, verbosity: int) -> None:
    """fgwkit: Fused Gromov-Wasserstein distances between attributed graphs.

    Compare graphs, compute barycenters, cluster and classify graph
    collections. Results are written as JSON or CSV files.
    """
    setup_logging(verbosity)
    ctx.obj = FgwContext(json_mode=json_mode, verbosity=verbosity)


# ── Register subcommands ──────────────────────────────────────────

from fgwkit.cli.compare import dist, sweep

cli.add_command(dist)
cli.add_command(sweep)

from fgwkit.cli.learn import barycenter, cluster, kernel, knn

cli.add_command(barycenter)
cli.add_command(cluster)
cli.add_command(knn)
cli.add_command(kernel)

from fgwkit.cli.generate import gen

cli.add_command(gen)

from fgwkit.cli.dataset_cmd import dataset

cli.add_command(dataset)

from fgwkit.cli.config_cmd import config

cli.add_command(config)
