"""Real roots of analytic functions on an interval, and minima of sampled functions.

:func:`boyd_find_roots` interpolates ``g`` at Chebyshev points, turns the
Chebyshev series into a palindromic polynomial in ``z = e^{iθ}`` and reads the
roots off a companion matrix. :func:`grid_parabolic_min` is the grid search
with parabolic refinement used by the singular-value fallback.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .linalg import DegeneratePolynomialError, companion_roots


LOGGER = logging.getLogger(__name__)

MIN_WIDTH_FACTOR = 1e-13
DEDUP_FACTOR = 1e-12
ENDPOINT_SLACK = 1e-10
SAMPLE_NOISE = 1e-15
GOLDEN_FRACTION = 0.3819660112501051


class NoConvergenceError(RuntimeError):
    """Raised when an interval cannot be resolved within the configured limits."""

    def __init__(self, message: str, *, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


@dataclass(frozen=True)
class BoydOptions:
    m_initial: int = 4
    m_max: int = 512
    coeff_decay_tol: float = 1e-12
    circle_tol: float = 1e-2
    beta_max: float = 1e-14
    min_subdivision_width: Optional[float] = None
    cluster_gap: Optional[float] = None
    max_evaluations: int = 20_000

    def __post_init__(self) -> None:
        if self.m_initial < 2 or self.m_max < self.m_initial:
            raise ValueError(
                f"Need 2 <= m_initial <= m_max (got {self.m_initial}, {self.m_max})."
            )
        for name in ("coeff_decay_tol", "circle_tol", "beta_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive.")
        if self.max_evaluations < self.m_initial + 1:
            raise ValueError("max_evaluations is smaller than one initial sampling pass.")
        if self.cluster_gap is not None and not self.cluster_gap > 0.0:
            raise ValueError("cluster_gap must be positive when given.")


@dataclass(frozen=True)
class Root:
    kappa: float
    beta: float


@dataclass(frozen=True)
class RootSet:
    """Roots in ascending order with the bookkeeping of the search.

    ``unresolved`` holds roots whose ``|β|`` stayed above ``beta_max`` but
    which were not subdivided further: members of a cluster closer than
    ``cluster_gap``, or survivors at ``min_subdivision_width``. They are not
    part of ``roots``.
    """

    roots: Tuple[Root, ...]
    m_final: int
    subdivisions: int
    evaluations: int
    unresolved: Tuple[Root, ...] = ()

    def __iter__(self) -> Iterator[Root]:
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def kappas(self) -> List[float]:
        return [root.kappa for root in self.roots]


@dataclass
class _SearchState:
    options: BoydOptions
    evaluate: Callable[[Sequence[float]], np.ndarray]
    evaluations: int = 0
    subdivisions: int = 0
    m_final: int = 0
    unresolved: List[Root] = field(default_factory=list)


def _make_evaluator(
    g: Callable[[float], complex], executor: Optional[Executor]
) -> Callable[[Sequence[float]], np.ndarray]:
    def _evaluate(kappas: Sequence[float]) -> np.ndarray:
        if executor is not None:
            values = list(executor.map(g, kappas))
        else:
            values = [g(kappa) for kappa in kappas]
        return np.asarray(values, dtype=complex)

    return _evaluate


def chebyshev_coefficients(samples: np.ndarray) -> np.ndarray:
    """Coefficients ``c_0..c_M`` of the even trigonometric interpolant.

    ``samples[j]`` is the value at ``θ_j = πj/M`` for ``j = 0..M``.
    """

    m = samples.shape[0] - 1
    periodic = np.concatenate([samples, samples[-2:0:-1]])
    return np.fft.fft(periodic)[: m + 1] / (2 * m)


def _laurent_coefficients(coefficients: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``z^M Σ_{|m|<=M} ĉ_m z^m`` (Nyquist term split)."""

    half = np.array(coefficients, dtype=complex, copy=True)
    half[-1] *= 0.5
    return np.concatenate([half[::-1], half[1:]])


def _roots_from_coefficients(
    coefficients: np.ndarray, a: float, b: float, circle_tol: float
) -> List[Root]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    try:
        mus = companion_roots(_laurent_coefficients(coefficients))
    except DegeneratePolynomialError:
        return []
    roots: List[Root] = []
    for mu in mus:
        if mu == 0 or abs(abs(mu) - 1.0) > circle_tol or mu.imag < 0.0:
            continue
        x = 0.5 * (mu + 1.0 / mu)
        if abs(x.real) > 1.0 + ENDPOINT_SLACK:
            continue
        kappa = min(max(mid + half * x.real, a), b)
        roots.append(Root(kappa=float(kappa), beta=float(half * x.imag)))
    return roots


def _sample(state: _SearchState, a: float, b: float, m: int, indices: np.ndarray) -> np.ndarray:
    if state.evaluations + indices.size > state.options.max_evaluations:
        raise NoConvergenceError(
            f"Evaluation budget of {state.options.max_evaluations} exhausted on [{a}, {b}].",
            diagnostics={"interval": (a, b), "m": m, "evaluations": state.evaluations},
        )
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    kappas = mid + half * np.cos(np.pi * indices / m)
    values = state.evaluate([float(k) for k in kappas])
    state.evaluations += indices.size
    if not np.all(np.isfinite(values)):
        raise NoConvergenceError(
            f"Non-finite samples on [{a}, {b}].",
            diagnostics={"interval": (a, b), "m": m, "evaluations": state.evaluations},
        )
    return values


def _decay_reference(magnitudes: np.ndarray, tol: float) -> float:
    """``|c_0|``, or ``max|c_m|`` when ``g`` is close to mean-free on the grid."""

    peak = float(np.max(magnitudes))
    leading = float(magnitudes[0])
    if tol * leading < SAMPLE_NOISE * peak:
        return peak
    return leading


def _has_neighbour(root: Root, roots: Sequence[Root], gap: float) -> bool:
    return any(other is not root and abs(other.kappa - root.kappa) < gap for other in roots)


def _solve_interval(state: _SearchState, a: float, b: float) -> List[Root]:
    options = state.options
    if b - a < MIN_WIDTH_FACTOR * max(1.0, abs(b)):
        raise NoConvergenceError(
            f"Interval [{a}, {b}] shrank below the resolvable width.",
            diagnostics={"interval": (a, b), "evaluations": state.evaluations},
        )

    m = options.m_initial
    samples = _sample(state, a, b, m, np.arange(m + 1))
    while True:
        coefficients = chebyshev_coefficients(samples)
        magnitudes = np.abs(coefficients)
        reference = _decay_reference(magnitudes, options.coeff_decay_tol)
        # Odd or even g has every other coefficient zero; test the last two.
        if reference == 0.0 or np.max(magnitudes[-2:]) <= options.coeff_decay_tol * reference:
            break
        if m >= options.m_max:
            LOGGER.debug("Coefficients did not decay on [%s, %s] at M=%s; bisecting", a, b, m)
            return _bisect(state, a, b)
        refined = np.empty(2 * m + 1, dtype=complex)
        refined[0::2] = samples
        refined[1::2] = _sample(state, a, b, 2 * m, np.arange(1, 2 * m, 2))
        samples = refined
        m *= 2

    state.m_final = max(state.m_final, m)
    roots = _roots_from_coefficients(coefficients, a, b, options.circle_tol)
    loose = [root for root in roots if abs(root.beta) > options.beta_max]
    if not loose:
        return roots
    accepted = [root for root in roots if abs(root.beta) <= options.beta_max]

    gap = options.cluster_gap
    if gap is not None and all(_has_neighbour(root, roots, gap) for root in loose):
        # Split multiple roots and near crossings; the caller resolves them on sigma_min.
        LOGGER.debug(
            "Handing %s clustered root(s) on [%s, %s] to the caller", len(loose), a, b
        )
        state.unresolved.extend(loose)
        return accepted

    limit = options.min_subdivision_width
    if limit is not None and b - a <= limit:
        # Nearly coincident real roots keep |beta| below the width; complex pairs do not.
        kept = [root for root in loose if abs(root.beta) <= b - a]
        LOGGER.debug(
            "Accepting %s root(s) on [%s, %s] with |beta| up to %.3g above the limit",
            len(kept),
            a,
            b,
            max(abs(root.beta) for root in loose),
        )
        state.unresolved.extend(kept)
        return accepted
    LOGGER.debug(
        "Root with |beta|=%.3g on [%s, %s]; bisecting",
        max(abs(root.beta) for root in loose),
        a,
        b,
    )
    return _bisect(state, a, b)


def _bisect(state: _SearchState, a: float, b: float) -> List[Root]:
    state.subdivisions += 1
    centre = 0.5 * (a + b)
    return _solve_interval(state, a, centre) + _solve_interval(state, centre, b)


def deduplicate_roots(roots: Sequence[Root]) -> List[Root]:
    """Merge roots closer than ``1e-12·max(1, |κ|)`` in both κ and β."""

    merged: List[Root] = []
    for root in sorted(roots, key=lambda item: (item.kappa, item.beta)):
        tolerance = DEDUP_FACTOR * max(1.0, abs(root.kappa))
        duplicate = None
        for index in range(len(merged) - 1, -1, -1):
            existing = merged[index]
            if root.kappa - existing.kappa > tolerance:
                break
            if abs(root.beta - existing.beta) <= tolerance:
                duplicate = index
                break
        if duplicate is None:
            merged.append(root)
        elif abs(root.beta) < abs(merged[duplicate].beta):
            merged[duplicate] = root
    return sorted(merged, key=lambda item: item.kappa)


def boyd_find_roots(
    g: Callable[[float], complex],
    a: float,
    b: float,
    options: Optional[BoydOptions] = None,
    *,
    executor: Optional[Executor] = None,
) -> RootSet:
    """Find all real roots of ``g`` on ``[a, b]``.

    ``g`` must be analytic in a neighbourhood of the interval. Samples of one
    refinement stage are evaluated through ``executor`` when given.
    """

    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"Invalid interval [{a}, {b}].")
    options = options or BoydOptions()
    state = _SearchState(options=options, evaluate=_make_evaluator(g, executor))
    roots = deduplicate_roots(_solve_interval(state, float(a), float(b)))
    unresolved = deduplicate_roots(state.unresolved)
    LOGGER.debug(
        "Found %s root(s) on [%s, %s] with %s evaluations and %s subdivisions",
        len(roots),
        a,
        b,
        state.evaluations,
        state.subdivisions,
    )
    return RootSet(
        roots=tuple(roots),
        m_final=state.m_final,
        subdivisions=state.subdivisions,
        evaluations=state.evaluations,
        unresolved=tuple(unresolved),
    )


# ---------------------------------------------------------------------------
# Grid search with parabolic refinement
# ---------------------------------------------------------------------------
def _parabola_vertex(
    left: float, mid: float, right: float, h_left: float, h_mid: float, h_right: float
) -> Optional[float]:
    p = (mid - left) * (h_mid - h_right)
    q = (mid - right) * (h_mid - h_left)
    denominator = p - q
    if denominator == 0.0 or not math.isfinite(denominator):
        return None
    numerator = (mid - left) * p - (mid - right) * q
    return mid - 0.5 * numerator / denominator


def _refine_bracket(
    h: Callable[[float], float],
    bracket: Tuple[float, float, float],
    values: Tuple[float, float, float],
    tol: float,
    max_iterations: int,
) -> Tuple[float, float]:
    left, mid, right = bracket
    h_left, h_mid, h_right = values
    for _ in range(max_iterations):
        if right - left <= tol:
            break
        x = _parabola_vertex(left, mid, right, h_left, h_mid, h_right)
        if x is not None and abs(x - mid) < tol:
            break
        if x is None or not (left < x < right) or x == mid:
            if right - mid > mid - left:
                x = mid + GOLDEN_FRACTION * (right - mid)
            else:
                x = mid - GOLDEN_FRACTION * (mid - left)
        h_x = float(h(x))
        if h_x < h_mid:
            if x > mid:
                left, h_left = mid, h_mid
            else:
                right, h_right = mid, h_mid
            mid, h_mid = x, h_x
        elif x > mid:
            right, h_right = x, h_x
        else:
            left, h_left = x, h_x
    return mid, h_mid


def _interior_minima(xs: Sequence[float], hs: Sequence[float]) -> List[int]:
    found = []
    for index in range(1, len(xs) - 1):
        before, value, after = hs[index - 1], hs[index], hs[index + 1]
        if (value < before and value <= after) or (value <= before and value < after):
            found.append(index)
    return found


def grid_parabolic_min(
    h: Callable[[float], float],
    a: float,
    b: float,
    n_grid: int,
    tol: float,
    *,
    min_gap: float = 1e-7,
    max_iterations: int = 100,
    scan_depth: int = 2,
) -> List[Tuple[float, float]]:
    """Local minima of ``h`` on ``[a, b]`` as ``(x, h(x))`` pairs in ascending ``x``.

    Interior grid minima are refined by successive parabolic interpolation.
    Around each refined minimum ``h`` is then sampled at distances halving
    from the grid spacing down to ``min_gap``; a dip in those samples reveals
    a second minimum hidden in the same grid cell and is refined in turn.
    """

    if n_grid < 3 or not a < b:
        raise ValueError(f"Need n_grid >= 3 and a < b (got {n_grid}, [{a}, {b}]).")
    xs = np.linspace(a, b, n_grid)
    hs = [float(h(float(x))) for x in xs]
    spacing = (b - a) / (n_grid - 1)

    minima: List[Tuple[float, float]] = []
    pending: List[Tuple[float, float, int]] = []
    for index in _interior_minima(xs, hs):
        bracket = (float(xs[index - 1]), float(xs[index]), float(xs[index + 1]))
        values = (hs[index - 1], hs[index], hs[index + 1])
        x_min, h_min = _refine_bracket(h, bracket, values, tol, max_iterations)
        minima.append((x_min, h_min))
        pending.append((x_min, h_min, 0))

    while pending:
        centre, h_centre, depth = pending.pop()
        if depth >= scan_depth:
            continue
        for direction in (-1.0, 1.0):
            distances = []
            distance = spacing
            while distance >= min_gap:
                distances.append(distance)
                distance *= 0.5
            distances.reverse()
            shell_x = [centre]
            shell_h = [h_centre]
            for distance in distances:
                x = centre + direction * distance
                if not a <= x <= b:
                    break
                shell_x.append(x)
                shell_h.append(float(h(x)))
            for index in _interior_minima(shell_x, shell_h):
                ordered = sorted(
                    [
                        (shell_x[index - 1], shell_h[index - 1]),
                        (shell_x[index], shell_h[index]),
                        (shell_x[index + 1], shell_h[index + 1]),
                    ]
                )
                x_min, h_min = _refine_bracket(
                    h,
                    (ordered[0][0], ordered[1][0], ordered[2][0]),
                    (ordered[0][1], ordered[1][1], ordered[2][1]),
                    tol,
                    max_iterations,
                )
                if all(abs(x_min - known) > 10.0 * tol for known, _ in minima):
                    minima.append((x_min, h_min))
                    pending.append((x_min, h_min, depth + 1))

    minima.sort()
    deduplicated: List[Tuple[float, float]] = []
    for x_min, h_min in minima:
        if deduplicated and abs(x_min - deduplicated[-1][0]) <= 10.0 * tol:
            if h_min < deduplicated[-1][1]:
                deduplicated[-1] = (x_min, h_min)
            continue
        deduplicated.append((x_min, h_min))
    return deduplicated


__all__ = [
    "BoydOptions",
    "NoConvergenceError",
    "Root",
    "RootSet",
    "boyd_find_roots",
    "chebyshev_coefficients",
    "deduplicate_roots",
    "grid_parabolic_min",
]
