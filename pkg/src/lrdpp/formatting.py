"""Terminal tables for evaluation reports, check results and benchmarks."""

from __future__ import annotations

from typing import Optional, Sequence

from rich.console import Console
from rich.table import Table

from .bench import BenchRow
from .checks import CheckResult
from .evaluation import EvalReport


def format_report_table(report: EvalReport, console: Optional[Console] = None) -> None:
    """
    Print an evaluation report as a summary table plus a precision@k table.

    Args:
        report: Metrics returned by evaluation.evaluate
        console: Console to print on (defaults to stdout)
    """
    console = console or Console()

    summary = Table(
        title="Basket completion",
        title_style="bold cyan",
        show_header=True,
        header_style="bold magenta",
        border_style="bright_blue",
    )
    summary.add_column("Metric", style="cyan", no_wrap=True)
    summary.add_column("Value", style="white", justify="right")
    summary.add_row("MPR", f"{report.mpr:.2f}")
    if report.test_log_likelihood is not None:
        summary.add_row("Avg test log-likelihood", f"{report.test_log_likelihood:.5f}")
    summary.add_row("Instances", str(report.n_instances))
    summary.add_row("Skipped", str(report.n_skipped), style="yellow" if report.n_skipped else None)
    console.print(summary)

    precision = Table(
        title=f"Precision@k (popularity weighting beta={report.beta:g})",
        title_style="bold cyan",
        show_header=True,
        header_style="bold magenta",
        border_style="bright_blue",
    )
    precision.add_column("k", style="cyan", justify="right", no_wrap=True)
    precision.add_column("precision@k", style="green", justify="right")
    precision.add_column("pop-weighted", style="magenta", justify="right")
    for k in sorted(report.precision_at):
        precision.add_row(
            str(k),
            f"{report.precision_at[k]:.4f}",
            f"{report.pop_weighted_precision_at[k]:.4f}",
        )
    console.print(precision)


def format_check_table(results: Sequence[CheckResult], console: Optional[Console] = None) -> None:
    """Print one row per checked property, failures highlighted in red."""
    console = console or Console()

    table = Table(
        title="Oracle equivalence checks",
        title_style="bold cyan",
        show_header=True,
        header_style="bold magenta",
        border_style="bright_blue",
    )
    table.add_column("Property", style="cyan", no_wrap=True)
    table.add_column("Trials", justify="right")
    table.add_column("Max error", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Result", no_wrap=True)
    table.add_column("Description", style="white", max_width=50)

    for result in results:
        if result.passed:
            verdict, style = "PASS", "green"
        else:
            verdict, style = f"FAIL (seed {result.failing_seed})", "red"
        table.add_row(
            result.name,
            str(result.trials),
            f"{result.max_error:.3e}",
            f"{result.tolerance:.0e}",
            f"[bold {style}]{verdict}[/bold {style}]",
            result.description,
        )
    console.print(table)


def format_bench_table(rows: Sequence[BenchRow], console: Optional[Console] = None) -> None:
    """Print average prediction time and parameter memory for each catalog size."""
    console = console or Console()

    table = Table(
        title="Prediction time per basket",
        title_style="bold cyan",
        show_header=True,
        header_style="bold magenta",
        border_style="bright_blue",
    )
    table.add_column("M", style="cyan", justify="right", no_wrap=True)
    table.add_column("K", justify="right")
    table.add_column("low-rank ms", style="green", justify="right")
    table.add_column("full-rank ms", style="yellow", justify="right")
    table.add_column("speedup", style="bold", justify="right")
    table.add_column("V bytes", justify="right")
    table.add_column("L bytes", justify="right")

    for row in rows:
        table.add_row(
            str(row.M),
            str(row.K),
            f"{row.low_rank_ms:.3f}",
            f"{row.full_rank_ms:.3f}",
            f"{row.speedup:.1f}x",
            f"{row.low_rank_bytes:,}",
            f"{row.full_rank_bytes:,}",
        )
    console.print(table)
