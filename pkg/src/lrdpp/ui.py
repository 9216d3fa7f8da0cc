"""UI utilities for rich terminal output."""

from __future__ import annotations

import logging
from typing import Any, Mapping

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Status messages go to stderr so that stdout stays pipeable.
console = Console(stderr=True)


def setup_logging(verbosity: int = 0) -> None:
    """Route library logging through rich. 0 = INFO, >0 = DEBUG, <0 = WARNING."""
    level = logging.DEBUG if verbosity > 0 else logging.WARNING if verbosity < 0 else logging.INFO
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=True)
    root = logging.getLogger("lrdpp")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def print_success(message: str) -> None:
    """Print a success message."""
    console.print(f"[bold green]✓[/bold green] {message}")


def print_error(message: str) -> None:
    """Print an error message."""
    console.print(f"[bold red]✗[/bold red] {message}")


def print_info(message: str) -> None:
    """Print an info message."""
    console.print(f"[bold blue]ℹ[/bold blue] {message}")


def print_warning(message: str) -> None:
    """Print a warning message."""
    console.print(f"[bold yellow]⚠[/bold yellow] {message}")


def print_config(command: str, resolved: Mapping[str, Any]) -> None:
    """Print the fully resolved configuration of a command run."""
    table = Table(
        title=f"lrdpp {command}: resolved configuration",
        title_style="bold cyan",
        show_header=True,
        header_style="bold magenta",
        border_style="bright_blue",
    )
    table.add_column("Option", style="bold yellow", no_wrap=True)
    table.add_column("Value", style="white")
    for key, value in resolved.items():
        table.add_row(key, str(value))
    console.print(table)
