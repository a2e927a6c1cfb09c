"""Dirichlet eigenfrequencies of planar domains from boundary-integral determinants.

The interval is cut into windows holding roughly a fixed number of
eigenvalues. In each window the determinant of the Nyström matrix is handed to
the Chebyshev rootfinder; clusters of roots closer than ``close_root_s`` are
re-examined with the smallest singular value. Results carry an a-posteriori
error estimate and, for the double-layer representation, a flag for spurious
roots coming from interior resonances of holes or cavities.
"""

from __future__ import annotations

import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..config import SolverDefaults
from ..numerics.geometry import Boundary, DiscreteBoundary, discretize, interior_grid
from ..numerics.linalg import ScaledDeterminant, lowest_singular_values, lu_det, min_singular
from ..numerics.operator import assemble, layer_potential, resolve_eta
from ..numerics.rootfind import (
    BoydOptions,
    NoConvergenceError,
    Root,
    boyd_find_roots,
    grid_parabolic_min,
)
from .events import emit_task_event


LOGGER = logging.getLogger(__name__)

STAR_SHAPED_CONSTANT = 3.5
MULTIPLICITY_RATIO = 10.0
MULTIPLICITY_FLOOR = 1e-10
WEYL_TOLERANCE = 3.0
CROSS_WINDOW_DEDUP = 1e-11
MIN_ACCEPTED_POINTS = 100
MIN_NODES = 64

ProgressCallback = Callable[[str, int, int], None]


class EstimateUnavailableError(RuntimeError):
    """Raised when the interior grid is too coarse for the error estimate."""


# ---------------------------------------------------------------------------
# Options
# ---------------------------------------------------------------------------
_N_RULE_PATTERN = re.compile(
    r"^\s*max\(\s*(?P<floor>\d+)\s*,\s*(?P<base>[-+]?\d+(?:\.\d*)?)\s*\+\s*"
    r"(?P<slope>\d+(?:\.\d*)?)\s*\*\s*kappa\s*\)\s*$"
)


@dataclass(frozen=True)
class NRule:
    """Node count ``max(floor, base + slope·κ)`` rounded up to an even integer."""

    floor: int = 150
    base: float = 100.0
    slope: float = 5.0

    @classmethod
    def parse(cls, text: str) -> "NRule":
        match = _N_RULE_PATTERN.match(text or "")
        if match is None:
            raise ValueError(f"N rule must look like 'max(A,B+C*kappa)' (got {text!r}).")
        return cls(
            floor=int(match.group("floor")),
            base=float(match.group("base")),
            slope=float(match.group("slope")),
        )

    def __call__(self, kappa: float) -> int:
        count = max(self.floor, int(math.ceil(self.base + self.slope * kappa)))
        count = max(count, MIN_NODES)
        return count + (count % 2)

    def __str__(self) -> str:
        return f"max({self.floor},{self.base:g}+{self.slope:g}*kappa)"


@dataclass(frozen=True)
class SolveOptions:
    n_rule: NRule = field(default_factory=NRule)
    eta: Optional[float] = None
    boyd: BoydOptions = field(default_factory=BoydOptions)
    close_root_s: float = 1e-3
    svd_tol: float = 1e-6
    svd_grid: int = 21
    window_min_width: float = 0.25
    window_target_roots: int = 10
    threads: int = 1
    estimate_errors: bool = True
    error_grid: int = 200
    cross_check: bool = True
    weyl_audit: bool = True
    n_nodes: Optional[int] = None

    @classmethod
    def from_defaults(
        cls, defaults: SolverDefaults, *, resonant: bool = False, **overrides: Any
    ) -> "SolveOptions":
        """Options from configuration, with the resonant-shape rule and β when asked."""

        close_root_s = overrides.pop("close_root_s", defaults.close_root_s)
        beta = overrides.pop("beta_max", defaults.beta_resonant if resonant else defaults.beta)
        boyd = BoydOptions(
            m_initial=defaults.m_initial,
            m_max=defaults.m_max,
            coeff_decay_tol=defaults.coeff_decay_tol,
            circle_tol=defaults.circle_tol,
            beta_max=beta,
            min_subdivision_width=10.0 * close_root_s,
            cluster_gap=close_root_s,
        )
        n_rule = overrides.pop(
            "n_rule", NRule.parse(defaults.n_rule_resonant if resonant else defaults.n_rule)
        )
        values: Dict[str, Any] = {
            "n_rule": n_rule,
            "boyd": boyd,
            "close_root_s": close_root_s,
            "svd_tol": defaults.svd_tol,
            "window_min_width": defaults.window_min_width,
            "window_target_roots": defaults.window_target_roots,
            "threads": defaults.threads,
            "error_grid": defaults.error_grid,
        }
        values.update(overrides)
        return cls(**values)

    @property
    def representation(self) -> str:
        if self.eta is None:
            return "cfie"
        return "dlp" if self.eta == 0.0 else f"eta={self.eta:g}"

    def nodes_for(self, kappa: float) -> int:
        return self.n_nodes if self.n_nodes is not None else self.n_rule(kappa)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EigResult:
    kappa: float
    beta: float
    method: str
    n_nodes: int
    err_est: Optional[float] = None
    err_est_up_to_constant: bool = False
    spurious: bool = False
    multiplicity: int = 1
    sigma_min: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["N"] = payload.pop("n_nodes")
        return payload


@dataclass(frozen=True)
class WeylAudit:
    expected: float
    found: int
    warning: bool

    @property
    def mismatch(self) -> float:
        return self.found - self.expected


@dataclass
class SolveReport:
    domain: Dict[str, Any]
    interval: Tuple[float, float]
    representation: str
    results: List[EigResult]
    weyl: Optional[WeylAudit] = None
    determinant_evaluations: int = 0
    svd_evaluations: int = 0
    windows: int = 0
    elapsed_seconds: float = 0.0

    @property
    def found_count(self) -> int:
        return sum(result.multiplicity for result in self.results if not result.spurious)

    def labelled_kappas(self) -> List[float]:
        """Non-spurious eigenfrequencies repeated by multiplicity."""

        values: List[float] = []
        for result in self.results:
            if not result.spurious:
                values.extend([result.kappa] * result.multiplicity)
        return values

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.domain,
            "interval": list(self.interval),
            "representation": self.representation,
            "eigenfrequencies": [result.to_dict() for result in self.results],
            "weyl": None
            if self.weyl is None
            else {
                "expected": self.weyl.expected,
                "found": self.weyl.found,
                "mismatch": self.weyl.mismatch,
                "warning": self.weyl.warning,
            },
            "timing_seconds": self.elapsed_seconds,
            "diagnostics": {
                "determinant_evaluations": self.determinant_evaluations,
                "svd_evaluations": self.svd_evaluations,
                "windows": self.windows,
            },
        }


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------
def weyl_count(area: float, perimeter: float, kappa: float) -> float:
    """Expected number of eigenfrequencies below ``κ``."""

    return area * kappa**2 / (4.0 * math.pi) - perimeter * kappa / (4.0 * math.pi)


def window_width(area: float, kappa: float, min_width: float = 0.25, target: int = 10) -> float:
    return max(min_width, target * 2.0 * math.pi / (area * max(kappa, 1e-12)))


def plan_windows(boundary: Boundary, a: float, b: float, options: SolveOptions) -> List[Tuple[float, float]]:
    windows: List[Tuple[float, float]] = []
    lower = a
    while lower < b:
        width = window_width(
            boundary.area, lower, options.window_min_width, options.window_target_roots
        )
        upper = min(b, lower + width)
        if b - upper < 0.5 * options.window_min_width:
            upper = b
        windows.append((lower, upper))
        lower = upper
    return windows


def _check_interval(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b) and 0.0 < a < b):
        raise ValueError(f"Interval must satisfy 0 < a < b (got [{a}, {b}]).")


def discretize_total(boundary: Boundary, total: int) -> DiscreteBoundary:
    """Split ``total`` nodes evenly over the curves, each count rounded up to even."""

    per_curve = int(math.ceil(total / len(boundary.curves)))
    per_curve = max(4, per_curve + (per_curve % 2))
    return discretize(boundary, per_curve)


def discretize_for(boundary: Boundary, kappa: float, options: SolveOptions) -> DiscreteBoundary:
    return discretize_total(boundary, options.nodes_for(kappa))


def determinant_function(
    disc: DiscreteBoundary, eta: Optional[float], *, scale_at: Optional[float] = None
) -> Callable[[float], complex]:
    """``κ -> det(I - M_N(κ) - iη Q_N(κ))`` on a fixed discretisation.

    With ``scale_at`` the values are divided by the power of two of the
    determinant at that wavenumber; the roots are unchanged.
    """

    shift = 0
    if scale_at is not None:
        shift = lu_det(assemble(disc, scale_at, eta).matrix).exponent

    def _determinant(kappa: float) -> complex:
        determinant = lu_det(assemble(disc, kappa, eta).matrix)
        return ScaledDeterminant(determinant.mantissa, determinant.exponent - shift).to_complex()

    return _determinant


def sigma_min_at(disc: DiscreteBoundary, kappa: float, eta: Optional[float]) -> float:
    return min_singular(assemble(disc, kappa, eta).matrix).sigma


def sweep_sigma_min(
    boundary: Boundary,
    a: float,
    b: float,
    n_samples: int,
    options: SolveOptions,
) -> List[Tuple[float, float]]:
    """``σ_min`` on an even κ grid, with one discretisation sized for ``b``."""

    if n_samples < 2 or not a < b:
        raise ValueError(f"Need n_samples >= 2 and a < b (got {n_samples}, [{a}, {b}]).")
    disc = discretize_for(boundary, b, options)
    return [
        (float(kappa), sigma_min_at(disc, float(kappa), options.eta))
        for kappa in np.linspace(a, b, n_samples)
    ]


def estimate_error(
    boundary: Boundary,
    kappa: float,
    options: SolveOptions,
    *,
    disc: Optional[DiscreteBoundary] = None,
) -> Tuple[float, bool]:
    """Return ``(error_estimate, up_to_constant)`` for an approximate eigenfrequency.

    The estimate is ``C σ_min / (2κ ‖u‖_{L²(Ω)})`` where ``u`` is the field of
    the minimising density and ``C = 3.5`` for star-shaped domains. Other
    domains use ``C = 1`` and are flagged as known only up to a constant.
    """

    disc = disc or discretize_for(boundary, kappa, options)
    eta = resolve_eta(kappa, options.eta)
    operator = assemble(disc, kappa, eta)
    triplet = min_singular(operator.matrix)
    grid = interior_grid(
        boundary, options.error_grid, options.error_grid, disc.exclusion_distance
    )
    points, cell = grid.points, grid.cell_area
    if points.shape[0] < MIN_ACCEPTED_POINTS:
        raise EstimateUnavailableError(
            f"Only {points.shape[0]} interior grid points survived the boundary exclusion."
        )
    field_values = layer_potential(
        disc, triplet.right, points, kappa, double_weight=1.0, single_weight=1j * eta
    )
    norm = math.sqrt(float(np.sum(np.abs(field_values) ** 2)) * cell)
    if norm == 0.0:
        raise EstimateUnavailableError("Interior field vanished on the estimation grid.")
    star = boundary.is_star_shaped
    constant = STAR_SHAPED_CONSTANT if star else 1.0
    return constant * triplet.sigma / (2.0 * kappa * norm), not star


def cross_check_representations(
    boundary: Boundary, kappas: Sequence[float], options: SolveOptions
) -> List[bool]:
    """Flag roots where the double-layer matrix is singular but the combined one is not."""

    flags: List[bool] = []
    for kappa in kappas:
        disc = discretize_for(boundary, kappa, options)
        sigma_combined = sigma_min_at(disc, kappa, None)
        sigma_double = sigma_min_at(disc, kappa, 0.0)
        spurious = sigma_combined > options.svd_tol and sigma_double <= options.svd_tol
        if spurious:
            emit_task_event(
                "spurious",
                "Root flagged as spurious",
                payload={
                    "kappa": kappa,
                    "sigma_cfie": sigma_combined,
                    "sigma_dlp": sigma_double,
                },
            )
        flags.append(spurious)
    return flags


@dataclass
class _Counters:
    determinant: int = 0
    svd: int = 0


def _multiplicity(matrix: np.ndarray) -> Tuple[int, float]:
    lowest = lowest_singular_values(matrix, 2)
    sigma = float(lowest[0])
    if lowest.size > 1 and lowest[1] <= max(MULTIPLICITY_RATIO * sigma, MULTIPLICITY_FLOOR):
        return 2, sigma
    return 1, sigma


def _svd_minima(
    boundary: Boundary,
    lower: float,
    upper: float,
    n_grid: int,
    options: SolveOptions,
    counters: _Counters,
    *,
    scan_depth: int,
) -> Tuple[List[EigResult], DiscreteBoundary]:
    disc = discretize_for(boundary, upper, options)

    def _objective(kappa: float) -> float:
        counters.svd += 1
        return sigma_min_at(disc, kappa, options.eta) ** 2

    tolerance = 1e-12 * max(1.0, upper)
    minima = grid_parabolic_min(
        _objective, lower, upper, n_grid, tolerance, scan_depth=scan_depth
    )
    results = []
    for kappa, value in minima:
        sigma = math.sqrt(max(value, 0.0))
        if sigma > options.svd_tol:
            continue
        counters.svd += 1
        multiplicity, sigma = _multiplicity(assemble(disc, kappa, options.eta).matrix)
        results.append(
            EigResult(
                kappa=float(kappa),
                beta=0.0,
                method="svd",
                n_nodes=disc.total_nodes,
                multiplicity=multiplicity,
                sigma_min=sigma,
            )
        )
    return results, disc


def _cluster(roots: Sequence[Tuple[Root, int]], gap: float) -> List[List[Tuple[Root, int]]]:
    clusters: List[List[Tuple[Root, int]]] = []
    for item in sorted(roots, key=lambda entry: entry[0].kappa):
        if clusters and item[0].kappa - clusters[-1][-1][0].kappa < gap:
            clusters[-1].append(item)
        else:
            clusters.append([item])
    return clusters


def _degenerate_pair(
    boundary: Boundary,
    cluster: Sequence[Tuple[Root, int]],
    options: SolveOptions,
    counters: _Counters,
) -> Optional[EigResult]:
    """A repeated root read off the mean of its split pair with one factorisation.

    A double root of the determinant comes out of the rootfinder as two
    roots whose mean is accurate to the sample noise. Both lowest singular
    values vanish there; otherwise ``None`` is returned and the pair goes to
    the grid search.
    """

    if len(cluster) != 2:
        return None
    centre = float(np.mean([root.kappa for root, _ in cluster]))
    disc = discretize_total(boundary, max(n_nodes for _, n_nodes in cluster))
    counters.svd += 1
    lowest = lowest_singular_values(assemble(disc, centre, options.eta).matrix, 2)
    if lowest.size < 2 or lowest[1] > MULTIPLICITY_FLOOR:
        return None
    return EigResult(
        kappa=centre,
        beta=0.0,
        method="svd",
        n_nodes=disc.total_nodes,
        multiplicity=2,
        sigma_min=float(lowest[0]),
    )


def _resolve_clusters(
    boundary: Boundary,
    roots: Sequence[Tuple[Root, int]],
    options: SolveOptions,
    counters: _Counters,
) -> List[EigResult]:
    s = options.close_root_s
    results: List[EigResult] = []
    for cluster in _cluster(roots, s):
        if len(cluster) == 1:
            root, n_nodes = cluster[0]
            results.append(
                EigResult(kappa=root.kappa, beta=root.beta, method="boyd-det", n_nodes=n_nodes)
            )
            continue
        degenerate = _degenerate_pair(boundary, cluster, options, counters)
        if degenerate is not None:
            results.append(degenerate)
            continue
        centre = float(np.mean([root.kappa for root, _ in cluster]))
        low = min(root.kappa for root, _ in cluster) - s
        high = max(root.kappa for root, _ in cluster) + s
        emit_task_event(
            "svd-fallback",
            "Close roots handed to the singular-value search",
            payload={"centre": centre, "roots": len(cluster)},
            level=logging.DEBUG,
        )
        minima, _ = _svd_minima(
            boundary,
            centre - 5.0 * s,
            centre + 5.0 * s,
            options.svd_grid,
            options,
            counters,
            scan_depth=2,
        )
        minima = [result for result in minima if low <= result.kappa <= high]
        if not minima:
            LOGGER.warning(
                "Singular-value search found no minimum near %.12g; keeping determinant roots",
                centre,
            )
            results.extend(
                EigResult(kappa=root.kappa, beta=root.beta, method="boyd-det", n_nodes=n_nodes)
                for root, n_nodes in cluster
            )
            continue
        results.extend(minima)
    return results


def _finalise(
    boundary: Boundary,
    results: List[EigResult],
    a: float,
    b: float,
    options: SolveOptions,
) -> Tuple[List[EigResult], Optional[WeylAudit]]:
    results = sorted((r for r in results if a <= r.kappa <= b), key=lambda r: r.kappa)

    if options.cross_check and options.eta == 0.0 and results:
        flags = cross_check_representations(boundary, [r.kappa for r in results], options)
        results = [replace(r, spurious=flag) for r, flag in zip(results, flags)]

    if options.estimate_errors:
        estimated = []
        for result in results:
            try:
                error, up_to_constant = estimate_error(boundary, result.kappa, options)
            except EstimateUnavailableError as error_info:
                LOGGER.warning("No error estimate at κ=%.12g: %s", result.kappa, error_info)
                estimated.append(result)
                continue
            estimated.append(
                replace(result, err_est=error, err_est_up_to_constant=up_to_constant)
            )
        results = estimated

    audit = None
    if options.weyl_audit and weyl_count(boundary.area, boundary.perimeter, a) < 0.5:
        expected = weyl_count(boundary.area, boundary.perimeter, b)
        found = sum(r.multiplicity for r in results if not r.spurious)
        audit = WeylAudit(
            expected=expected,
            found=found,
            warning=abs(found - expected) > WEYL_TOLERANCE,
        )
        if audit.warning:
            LOGGER.warning(
                "Weyl audit on [0, %s]: found %s eigenfrequencies, expected about %.1f",
                b,
                found,
                expected,
            )
    return results, audit


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------
def determinant_roots(
    boundary: Boundary,
    a: float,
    b: float,
    options: SolveOptions,
    *,
    progress: Optional[ProgressCallback] = None,
) -> Tuple[List[Tuple[Root, int]], int, int]:
    """Chebyshev roots of the determinant window by window.

    Returns ``(roots with their node counts, determinant evaluations, windows)``.
    Roots repeated at a shared window edge are kept once.
    """

    windows = plan_windows(boundary, a, b, options)
    boyd = options.boyd
    if boyd.cluster_gap is None:
        boyd = replace(boyd, cluster_gap=options.close_root_s)
    executor = ThreadPoolExecutor(max_workers=options.threads) if options.threads > 1 else None
    collected: List[Tuple[Root, int]] = []
    evaluations = 0
    try:
        for index, (lower, upper) in enumerate(windows, start=1):
            if progress is not None:
                progress(f"[{lower:.4f}, {upper:.4f}]", index - 1, len(windows))
            disc = discretize_for(boundary, upper, options)
            window_started = time.perf_counter()
            g = determinant_function(disc, options.eta, scale_at=0.5 * (lower + upper))
            try:
                root_set = boyd_find_roots(g, lower, upper, boyd, executor=executor)
            except NoConvergenceError as error:
                error.diagnostics.setdefault("window", (lower, upper))
                error.diagnostics.setdefault("n_nodes", disc.total_nodes)
                raise
            evaluations += root_set.evaluations + 1
            previous = [root.kappa for root, _ in collected]
            for root in (*root_set.roots, *root_set.unresolved):
                tolerance = CROSS_WINDOW_DEDUP * max(1.0, root.kappa)
                if any(abs(root.kappa - known) <= tolerance for known in previous):
                    continue
                collected.append((root, disc.total_nodes))
            emit_task_event(
                "window",
                "Window solved",
                payload={
                    "lower": lower,
                    "upper": upper,
                    "nodes": disc.total_nodes,
                    "roots": len(root_set),
                    "unresolved": len(root_set.unresolved),
                    "evaluations": root_set.evaluations,
                    "m_final": root_set.m_final,
                    "subdivisions": root_set.subdivisions,
                },
                duration_ms=(time.perf_counter() - window_started) * 1000.0,
            )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    return collected, evaluations, len(windows)


def solve_interval(
    boundary: Boundary,
    a: float,
    b: float,
    options: Optional[SolveOptions] = None,
    *,
    domain: Optional[Mapping[str, Any]] = None,
    progress: Optional[ProgressCallback] = None,
) -> SolveReport:
    """Eigenfrequencies in ``[a, b]`` via determinants, Chebyshev roots and SVD fallback."""

    _check_interval(a, b)
    options = options or SolveOptions()
    started = time.perf_counter()
    counters = _Counters()
    collected, counters.determinant, windows = determinant_roots(
        boundary, a, b, options, progress=progress
    )
    results = _resolve_clusters(boundary, collected, options, counters)
    results, audit = _finalise(boundary, results, a, b, options)
    if progress is not None:
        progress("Solve finished", windows, windows)

    return SolveReport(
        domain=dict(domain or {"label": boundary.label}),
        interval=(float(a), float(b)),
        representation=options.representation,
        results=results,
        weyl=audit,
        determinant_evaluations=counters.determinant,
        svd_evaluations=counters.svd,
        windows=windows,
        elapsed_seconds=time.perf_counter() - started,
    )


def scan_interval_svd(
    boundary: Boundary,
    a: float,
    b: float,
    options: Optional[SolveOptions] = None,
    *,
    grid_step: Optional[float] = None,
    scan_depth: int = 0,
    domain: Optional[Mapping[str, Any]] = None,
) -> SolveReport:
    """Eigenfrequencies as minima of ``σ_min`` on a κ grid (baseline method).

    Without ``grid_step`` the grid resolves a quarter of the mean eigenvalue
    spacing at the top of each window. ``scan_depth`` enables the search for
    minima hidden next to a refined one.
    """

    _check_interval(a, b)
    options = options or SolveOptions()
    started = time.perf_counter()
    counters = _Counters()
    windows = plan_windows(boundary, a, b, options)
    results: List[EigResult] = []
    for lower, upper in windows:
        step = grid_step
        if step is None:
            density = boundary.area * upper / (2.0 * math.pi)
            step = min(0.05, 0.25 / max(density, 1e-12))
        n_grid = max(3, int(math.ceil((upper - lower) / step)) + 1)
        minima, _ = _svd_minima(
            boundary, lower, upper, n_grid, options, counters, scan_depth=scan_depth
        )
        for result in minima:
            tolerance = CROSS_WINDOW_DEDUP * max(1.0, result.kappa)
            if results and abs(result.kappa - results[-1].kappa) <= tolerance:
                continue
            results.append(result)
    no_extras = replace(options, estimate_errors=False, cross_check=False)
    results, audit = _finalise(boundary, results, a, b, no_extras)
    return SolveReport(
        domain=dict(domain or {"label": boundary.label}),
        interval=(float(a), float(b)),
        representation=options.representation,
        results=results,
        weyl=audit,
        svd_evaluations=counters.svd,
        windows=len(windows),
        elapsed_seconds=time.perf_counter() - started,
    )


__all__ = [
    "EigResult",
    "EstimateUnavailableError",
    "NRule",
    "SolveOptions",
    "SolveReport",
    "WeylAudit",
    "cross_check_representations",
    "determinant_function",
    "determinant_roots",
    "discretize_for",
    "discretize_total",
    "estimate_error",
    "plan_windows",
    "scan_interval_svd",
    "sigma_min_at",
    "solve_interval",
    "sweep_sigma_min",
    "weyl_count",
    "window_width",
]
