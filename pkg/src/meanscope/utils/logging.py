"""Logging setup for the command line."""

import logging

from rich.console import Console
from rich.logging import RichHandler


def setup_logging(verbose: bool = False) -> None:
    """Route library logs to stderr through rich (DEBUG with --verbose, else WARNING)."""
    level = logging.DEBUG if verbose else logging.WARNING
    handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        show_path=verbose,
        markup=False,
    )
    root = logging.getLogger("meanscope")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False
