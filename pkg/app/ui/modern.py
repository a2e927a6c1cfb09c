"""A Rich-powered rendering of the shape catalogue and of solve summaries."""

from __future__ import annotations

from typing import Optional

from rich import box
from rich.columns import Columns
from rich.console import Console, Group
from rich.panel import Panel
from rich.rule import Rule
from rich.table import Table
from rich.text import Text

from ..services.solver import SolveReport
from .overview import SolveSnapshot, collect_catalog, collect_solve_summary


class ModernUI:
    """Render tables and panels using Rich widgets."""

    def __init__(self, *, console: Optional[Console] = None) -> None:
        self._console = console or Console()

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def show_catalog(self) -> None:
        console = self._console
        console.rule("[bold magenta]Shape Catalogue")
        table = Table(box=box.ROUNDED, expand=True, border_style="cyan")
        table.add_column("Type", style="bold")
        table.add_column("Description")
        table.add_column("Defaults", style="green")
        for shape in collect_catalog():
            name = Text(shape.name, style="bold")
            if shape.resonant:
                name.append("\nresonant", style="yellow")
            table.add_row(name, shape.description, shape.parameters)
        console.print(table)
        console.print(
            Text("Tip: pass --json for a machine-readable listing.", style="dim"),
            justify="center",
        )

    def show_report(self, report: SolveReport) -> None:
        snapshot = collect_solve_summary(report)
        console = self._console
        console.rule(
            f"[bold magenta]{snapshot.label} on {snapshot.interval} ({snapshot.representation})"
        )
        if not snapshot.rows:
            console.print(
                Panel(
                    "No eigenfrequencies in this interval.",
                    border_style="yellow",
                    box=box.ROUNDED,
                )
            )
        else:
            console.print(
                Columns(
                    [self._build_results_table(snapshot), self._build_stats_panel(snapshot)],
                    expand=True,
                )
            )

    # ------------------------------------------------------------------
    # Rendering helpers
    # ------------------------------------------------------------------
    @staticmethod
    def _build_results_table(snapshot: SolveSnapshot) -> Panel:
        table = Table(box=box.SIMPLE_HEAD, expand=True)
        table.add_column("#", justify="right", style="dim")
        table.add_column("κ", justify="right", style="bold")
        table.add_column("mult", justify="right")
        table.add_column("method")
        table.add_column("err", justify="right")
        table.add_column("flags", style="yellow")
        for row in snapshot.rows:
            table.add_row(
                str(row.index) if row.index else "–",
                f"{row.kappa:.15g}",
                str(row.multiplicity),
                row.method,
                f"{row.err_est:.2e}" if row.err_est is not None else "n/a",
                ", ".join(row.flags),
            )
        return Panel(table, title="Eigenfrequencies", border_style="cyan", box=box.ROUNDED)

    @staticmethod
    def _build_stats_panel(snapshot: SolveSnapshot) -> Panel:
        metrics = Table.grid(expand=True, padding=(0, 1))
        metrics.add_column(style="dim")
        metrics.add_column(justify="right", style="bold")
        metrics.add_row("Found", str(snapshot.found))
        metrics.add_row("Determinants", str(snapshot.determinant_evaluations))
        metrics.add_row("SVDs", str(snapshot.svd_evaluations))
        metrics.add_row("Seconds", f"{snapshot.elapsed_seconds:.2f}")

        parts = [metrics]
        if snapshot.weyl is not None:
            style = "bold red" if snapshot.weyl_warning else "green"
            parts.extend([Rule(style="magenta"), Text(f"Weyl: {snapshot.weyl}", style=style)])
        return Panel(Group(*parts), title="At a glance", border_style="magenta", box=box.ROUNDED)


__all__ = ["ModernUI"]
