"""Convergence, speed and close-root studies built on the solver."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..numerics.geometry import Boundary, make_boundary, make_ellipse
from ..numerics.linalg import lu_det
from ..numerics.operator import assemble
from ..numerics.rootfind import BoydOptions, NoConvergenceError, boyd_find_roots
from .events import emit_task_event
from .solver import (
    SolveOptions,
    SolveReport,
    determinant_function,
    determinant_roots,
    discretize_total,
    scan_interval_svd,
    solve_interval,
)


LOGGER = logging.getLogger(__name__)

CROSSING_INTERVAL = (7.0, 9.0)
CROSSING_SEMI_AXIS = 1.0


# ---------------------------------------------------------------------------
# Determinant convergence in N
# ---------------------------------------------------------------------------
def _offset_key(offset: float) -> str:
    return f"abs_f_offset_{offset:+g}"


def determinant_convergence(
    boundary: Boundary,
    kappa: float,
    n_list: Sequence[int],
    *,
    eta: Optional[float] = None,
    bracket: Optional[Tuple[float, float]] = None,
    offsets: Sequence[float] = (),
    boyd: Optional[BoydOptions] = None,
) -> List[Dict[str, Any]]:
    """``|f_N(κ)|`` and the bracketed root for each ``N``.

    Each row holds ``N``, ``abs_f``, ``log10_abs_f``, one ``abs_f_offset_<δ>``
    column per offset, ``root`` (the root in ``bracket`` closest to ``κ``) and
    ``root_change``, the distance to the root at the largest ``N``.
    """

    if not (math.isfinite(kappa) and kappa > 0.0):
        raise ValueError(f"Wavenumber must be positive (got {kappa}).")
    counts = [int(n) for n in n_list]
    if not counts or any(n < 4 or n % 2 for n in counts):
        raise ValueError(f"Node counts must be even and at least 4 (got {counts}).")
    if counts != sorted(counts):
        raise ValueError("Node counts must be ascending.")
    boyd = boyd or BoydOptions(beta_max=1e-10, min_subdivision_width=1e-3)

    rows: List[Dict[str, Any]] = []
    for n_nodes in counts:
        disc = discretize_total(boundary, n_nodes)
        determinant = lu_det(assemble(disc, kappa, eta).matrix)
        row: Dict[str, Any] = {
            "N": disc.total_nodes,
            "abs_f": abs(determinant),
            "log10_abs_f": determinant.log10_abs,
        }
        for offset in offsets:
            shifted = lu_det(assemble(disc, kappa + offset, eta).matrix)
            row[_offset_key(offset)] = abs(shifted)
        root = None
        if bracket is not None:
            g = determinant_function(disc, eta, scale_at=0.5 * (bracket[0] + bracket[1]))
            try:
                found = boyd_find_roots(g, bracket[0], bracket[1], boyd)
            except NoConvergenceError as error:
                LOGGER.warning("No root in %s at N=%s: %s", bracket, n_nodes, error)
            else:
                candidates = found.kappas + [item.kappa for item in found.unresolved]
                if candidates:
                    root = min(candidates, key=lambda value: abs(value - kappa))
        row["root"] = root
        rows.append(row)
        emit_task_event(
            "converge",
            "Determinant evaluated",
            payload={"N": disc.total_nodes, "log10_abs_f": row["log10_abs_f"], "root": root},
            level=logging.DEBUG,
        )

    reference = rows[-1]["root"]
    for row in rows:
        if row["root"] is None or reference is None:
            row["root_change"] = None
        else:
            row["root_change"] = abs(row["root"] - reference)
    return rows


def convergence_columns(offsets: Sequence[float] = ()) -> List[str]:
    return ["N", "abs_f", "log10_abs_f", *(_offset_key(o) for o in offsets), "root", "root_change"]


# ---------------------------------------------------------------------------
# Determinant pipeline against the singular-value scan
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MethodComparison:
    determinant: SolveReport
    svd_scan: SolveReport

    @property
    def determinant_factorizations(self) -> int:
        return self.determinant.determinant_evaluations + self.determinant.svd_evaluations

    @property
    def svd_factorizations(self) -> int:
        return self.svd_scan.svd_evaluations

    @property
    def factorization_ratio(self) -> float:
        return self.svd_factorizations / max(self.determinant_factorizations, 1)

    @property
    def time_ratio(self) -> float:
        return self.svd_scan.elapsed_seconds / max(self.determinant.elapsed_seconds, 1e-12)

    @property
    def max_difference(self) -> Optional[float]:
        """Largest gap between matched eigenfrequencies, ``None`` when the counts differ."""

        left = self.determinant.labelled_kappas()
        right = self.svd_scan.labelled_kappas()
        if len(left) != len(right) or not left:
            return None
        return max(abs(x - y) for x, y in zip(left, right))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "determinant": {
                "found": self.determinant.found_count,
                "factorizations": self.determinant_factorizations,
                "seconds": self.determinant.elapsed_seconds,
            },
            "svd_scan": {
                "found": self.svd_scan.found_count,
                "factorizations": self.svd_factorizations,
                "seconds": self.svd_scan.elapsed_seconds,
            },
            "factorization_ratio": self.factorization_ratio,
            "time_ratio": self.time_ratio,
            "max_difference": self.max_difference,
        }


def compare_methods(
    boundary: Boundary,
    a: float,
    b: float,
    options: Optional[SolveOptions] = None,
    *,
    grid_step: Optional[float] = None,
) -> MethodComparison:
    """Run both pipelines on ``[a, b]`` without error estimates or audits."""

    options = replace(
        options or SolveOptions(), estimate_errors=False, cross_check=False, weyl_audit=False
    )
    determinant = solve_interval(boundary, a, b, options)
    svd_scan = scan_interval_svd(boundary, a, b, options, grid_step=grid_step)
    comparison = MethodComparison(determinant=determinant, svd_scan=svd_scan)
    emit_task_event("benchmark", "Methods compared", payload=comparison.to_dict())
    return comparison


# ---------------------------------------------------------------------------
# Ellipse family with nearly crossing eigenfrequencies
# ---------------------------------------------------------------------------
def ellipse_crossing(
    semi_axes: Sequence[float],
    *,
    a: float = CROSSING_SEMI_AXIS,
    interval: Tuple[float, float] = CROSSING_INTERVAL,
    n_nodes: Optional[int] = None,
    options: Optional[SolveOptions] = None,
) -> List[Dict[str, Any]]:
    """Roots of ellipses ``(a cos t, b sin t)`` from the raw determinant and the SVD scan.

    Rows carry ``b``, ``method`` (``boyd-det`` or ``svd``), ``kappa`` and ``beta``.
    Both paths use the double-layer matrix.
    """

    base = options or SolveOptions()
    options = replace(
        base,
        eta=0.0,
        n_nodes=n_nodes if n_nodes is not None else base.n_nodes,
        estimate_errors=False,
        cross_check=False,
        weyl_audit=False,
    )
    lower, upper = interval
    rows: List[Dict[str, Any]] = []
    for semi_axis in semi_axes:
        started = time.perf_counter()
        boundary = make_boundary(make_ellipse(a, semi_axis), label=f"ellipse-b{semi_axis:g}")
        roots, _, _ = determinant_roots(boundary, lower, upper, options)
        for root, _ in roots:
            rows.append({"b": semi_axis, "method": "boyd-det", "kappa": root.kappa, "beta": root.beta})
        scan = scan_interval_svd(boundary, lower, upper, options, scan_depth=2)
        for result in scan.results:
            rows.extend(
                {"b": semi_axis, "method": "svd", "kappa": result.kappa, "beta": 0.0}
                for _ in range(result.multiplicity)
            )
        emit_task_event(
            "crossing",
            "Ellipse solved",
            payload={"b": semi_axis, "roots": len(roots), "svd_minima": len(scan.results)},
            duration_ms=(time.perf_counter() - started) * 1000.0,
        )
    return rows


__all__ = [
    "MethodComparison",
    "compare_methods",
    "convergence_columns",
    "determinant_convergence",
    "ellipse_crossing",
]
