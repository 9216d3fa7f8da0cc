"""Custom help formatter using rich for beautiful output."""

from __future__ import annotations

import argparse

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

COMMANDS = [
    ("train", "Learn a low-rank DPP kernel from a basket file"),
    ("predict", "Rank the most likely next items for a basket"),
    ("evaluate", "Basket-completion metrics: MPR, precision@k, popularity-weighted precision@k"),
    ("check", "Cross-check the fast code paths against brute-force oracles"),
    ("bench", "Compare low-rank and full-rank prediction time and memory"),
]


def print_help(parser: argparse.ArgumentParser) -> None:
    """Print beautiful help using rich formatting."""
    console = Console()

    # Title
    console.print()
    console.print(
        Panel(
            "[bold cyan]lrdpp[/bold cyan] - Low-rank DPP basket completion",
            subtitle="Learn item trait vectors from baskets and predict what comes next",
            border_style="cyan",
        )
    )
    console.print()

    table = Table(
        title="[bold magenta]Commands[/bold magenta]",
        show_header=True,
        header_style="bold cyan",
        border_style="bright_blue",
        title_style="bold magenta",
    )

    table.add_column("Command", style="bold green", no_wrap=True, min_width=12)
    table.add_column("Description", style="white", no_wrap=False)

    for cmd, desc in COMMANDS:
        table.add_row(cmd, desc)

    console.print(table)
    console.print()

    # Usage examples
    console.print("[bold cyan]Usage Examples:[/bold cyan]")
    console.print()
    console.print("  [dim]#[/dim] Train with a 70/30 split")
    console.print("  [green]lrdpp train --data feeding.txt --out feeding.model --test-fraction 0.3[/green]")
    console.print()
    console.print("  [dim]#[/dim] Complete a basket")
    console.print('  [green]lrdpp predict --model feeding.model --basket "bottle,bib" --top 5[/green]')
    console.print()
    console.print("  [dim]#[/dim] Evaluate on the held-out baskets")
    console.print("  [green]lrdpp evaluate --model feeding.model --data feeding.model.test.txt[/green]")
    console.print()
    console.print("  [dim]#[/dim] Verify the build against the oracles")
    console.print("  [green]lrdpp check[/green]")
    console.print()

    console.print("[dim]For help on a specific command, use:[/dim]")
    console.print("  [yellow]lrdpp <command> --help[/yellow]")
    console.print()


def print_command_help(parser: argparse.ArgumentParser, command: str) -> None:
    """Print help for a specific subcommand."""
    console = Console()

    subparsers_actions = [
        action for action in parser._actions if isinstance(action, argparse._SubParsersAction)
    ]

    if not subparsers_actions:
        parser.print_help()
        return

    for subparsers_action in subparsers_actions:
        if command in subparsers_action.choices:
            subparser = subparsers_action.choices[command]

            console.print()
            console.print(
                Panel(
                    f"[bold cyan]lrdpp {command}[/bold cyan]",
                    subtitle=subparser.description or dict(COMMANDS).get(command, ""),
                    border_style="cyan",
                )
            )
            console.print()

            options = [a for a in subparser._actions if a.option_strings and a.dest != "help"]
            if options:
                table = Table(
                    title="[bold magenta]Options[/bold magenta]",
                    show_header=True,
                    header_style="bold cyan",
                    border_style="bright_blue",
                    title_style="bold magenta",
                )
                table.add_column("Option", style="bold yellow", no_wrap=True, min_width=20)
                table.add_column("Description", style="white", no_wrap=False)
                table.add_column("Default", style="dim", no_wrap=True)

                for action in options:
                    opts = ", ".join(action.option_strings)
                    if action.metavar:
                        opts += f" {action.metavar}"
                    elif action.nargs != 0:
                        opts += f" <{action.dest}>"
                    default = "" if action.default in (None, False, argparse.SUPPRESS) else str(action.default)
                    if action.required:
                        default = "required"
                    table.add_row(opts, action.help or "", default)

                console.print(table)
                console.print()

            return

    parser.print_help()
