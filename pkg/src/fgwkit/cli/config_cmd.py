"""Config commands: show and initialize the TOML settings file."""

from __future__ import annotations

import click

from fgwkit.cli.main import FgwContext, JsonGroup, pass_context
from fgwkit.core.config import default_config, get_config_path, save_config


@click.group(cls=JsonGroup)
@pass_context
def config(ctx: FgwContext) -> None:
    """Show or initialize solver defaults."""
    pass


@config.command("show")
@pass_context
def config_show(ctx: FgwContext) -> None:
    """Print the merged configuration."""
    path = get_config_path()
    if ctx.json_mode:
        ctx.formatter.json({"path": str(path), "exists": path.exists(), "config": ctx.config})
        return
    ctx.formatter.info(f"{path}{'' if path.exists() else ' (not created, showing defaults)'}")
    for section, values in ctx.config.items():
        ctx.formatter.summary(f"[{section}]", values)


@config.command("init")
@click.option("--force", is_flag=True, help="Overwrite an existing config file.")
@pass_context
def config_init(ctx: FgwContext, force: bool) -> None:
    """Write the built-in defaults to the config file."""
    path = get_config_path()
    if path.exists() and not force:
        ctx.formatter.warning(f"{path} already exists (use --force to overwrite).")
        return
    written = save_config(default_config())
    if ctx.json_mode:
        ctx.formatter.json({"path": str(written)})
        return
    ctx.formatter.success(f"Wrote {written}")
