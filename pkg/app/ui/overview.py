"""Shared helpers for building snapshots of the shape catalogue and solve reports."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional

from ..services.shapes import catalog_entries
from ..services.solver import SolveReport


METHOD_LABELS: Dict[str, str] = {
    "boyd-det": "determinant",
    "svd": "singular value",
}


@dataclass
class ShapeOverview:
    name: str
    description: str
    resonant: bool
    parameters: str


@dataclass
class ResultRow:
    index: int
    kappa: float
    multiplicity: int
    method: str
    beta: float
    err_est: Optional[float]
    flags: List[str]


@dataclass
class SolveSnapshot:
    label: str
    interval: str
    representation: str
    rows: List[ResultRow]
    found: int
    weyl: Optional[str]
    weyl_warning: bool
    determinant_evaluations: int
    svd_evaluations: int
    elapsed_seconds: float


def format_parameters(spec: Mapping[str, Any]) -> str:
    """Compact ``key=value`` rendering of a normalised shape specification."""

    parts = []
    for key, value in spec.items():
        if key == "type":
            continue
        if isinstance(value, Mapping):
            if "type" in value:
                parts.append(f"{key}=({format_parameters(value)})")
            elif value:
                inner = ", ".join(f"{order}:{amplitude:g}" for order, amplitude in value.items())
                parts.append(f"{key}={{{inner}}}")
        else:
            parts.append(f"{key}={value:g}" if isinstance(value, float) else f"{key}={value}")
    return " ".join(parts) or "(no parameters)"


def collect_catalog() -> List[ShapeOverview]:
    return [
        ShapeOverview(
            name=entry["type"],
            description=entry["description"],
            resonant=entry["resonant"],
            parameters=format_parameters(entry["defaults"]),
        )
        for entry in catalog_entries()
    ]


def collect_solve_summary(report: SolveReport) -> SolveSnapshot:
    """Number the eigenfrequencies and gather the counters shown after a solve."""

    rows: List[ResultRow] = []
    index = 0
    for result in report.results:
        flags = []
        if result.spurious:
            flags.append("spurious")
        if result.err_est_up_to_constant:
            flags.append("err up to C")
        if not result.spurious:
            index += 1
        rows.append(
            ResultRow(
                index=index if not result.spurious else 0,
                kappa=result.kappa,
                multiplicity=result.multiplicity,
                method=METHOD_LABELS.get(result.method, result.method),
                beta=result.beta,
                err_est=result.err_est,
                flags=flags,
            )
        )
        if not result.spurious:
            index += result.multiplicity - 1

    weyl_text = None
    if report.weyl is not None:
        weyl_text = f"found {report.weyl.found}, expected {report.weyl.expected:.1f}"
    lower, upper = report.interval
    return SolveSnapshot(
        label=str(report.domain.get("label") or report.domain.get("type") or "domain"),
        interval=f"[{lower:g}, {upper:g}]",
        representation=report.representation,
        rows=rows,
        found=report.found_count,
        weyl=weyl_text,
        weyl_warning=bool(report.weyl and report.weyl.warning),
        determinant_evaluations=report.determinant_evaluations,
        svd_evaluations=report.svd_evaluations,
        elapsed_seconds=report.elapsed_seconds,
    )


__all__ = [
    "METHOD_LABELS",
    "ResultRow",
    "ShapeOverview",
    "SolveSnapshot",
    "collect_catalog",
    "collect_solve_summary",
    "format_parameters",
]
