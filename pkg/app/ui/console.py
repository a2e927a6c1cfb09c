"""Plain-text rendering of the shape catalogue and of solve summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ..services.solver import SolveReport
from .overview import collect_catalog, collect_solve_summary


@dataclass
class ConsoleSection:
    title: str
    entries: Iterable[str]


class ConsoleUI:
    """Minimal console UI writing through ``echo`` (``print`` by default)."""

    def __init__(self, *, echo: Optional[Callable[[str], None]] = None) -> None:
        self._echo = echo or print

    def show_catalog(self) -> None:
        self._render("Drum Eigen – Shape Catalogue", self._catalog_sections())

    def show_report(self, report: SolveReport) -> None:
        snapshot = collect_solve_summary(report)
        title = f"Drum Eigen – {snapshot.label} on {snapshot.interval} ({snapshot.representation})"
        entries = []
        for row in snapshot.rows:
            label = f"{row.index:4d}" if row.index else "   -"
            err = f"{row.err_est:.2e}" if row.err_est is not None else "n/a"
            extra = f"  x{row.multiplicity}" if row.multiplicity > 1 else ""
            flags = f"  [{', '.join(row.flags)}]" if row.flags else ""
            entries.append(
                f"{label}  {row.kappa:.15g}{extra}  {row.method}  err={err}{flags}"
            )
        counters = [
            f"Eigenfrequencies: {snapshot.found}",
            f"Determinant evaluations: {snapshot.determinant_evaluations}",
            f"SVD evaluations: {snapshot.svd_evaluations}",
            f"Elapsed: {snapshot.elapsed_seconds:.2f} s",
        ]
        if snapshot.weyl is not None:
            marker = " (WARNING)" if snapshot.weyl_warning else ""
            counters.append(f"Weyl audit: {snapshot.weyl}{marker}")
        self._render(
            title,
            [
                ConsoleSection(title="Eigenfrequencies", entries=entries),
                ConsoleSection(title="Summary", entries=counters),
            ],
        )

    def _render(self, heading: str, sections: Iterable[ConsoleSection]) -> None:
        self._echo(heading)
        self._echo("=" * 40)
        for section in sections:
            self._echo(section.title)
            self._echo("-" * len(section.title))
            has_entries = False
            for entry in section.entries:
                has_entries = True
                self._echo(entry)
            if not has_entries:
                self._echo("(empty)")
            self._echo("")

    @staticmethod
    def _catalog_sections() -> Iterable[ConsoleSection]:
        for shape in collect_catalog():
            title = f"Shape: {shape.name}" + (" (resonant)" if shape.resonant else "")
            yield ConsoleSection(
                title=title,
                entries=[f"  {shape.description}", f"  defaults: {shape.parameters}"],
            )


__all__ = ["ConsoleUI"]
