"""Allow running as `python -m fgwkit`."""

from fgwkit.cli.main import cli

cli()
