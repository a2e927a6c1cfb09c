"""Boundary curves, their equispaced discretisation and point queries.

A domain is described by an outer closed curve and zero or more hole curves.
Every curve is a ``2π``-periodic map ``t -> x(t)``. The outer curve is stored
counter-clockwise and holes are stored clockwise, so the single formula
``n = (x2', -x1') / |x'|`` yields normals pointing out of the domain on every
component.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np


LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
VALIDATION_SAMPLES = 10_000
QUERY_NODES = 512
EVAL_CHUNK_SIZE = 2048
QUERY_CHUNK_ENTRIES = 1 << 20
MAX_QUERY_NODES = 1 << 16
EXCLUSION_FACTOR = 5.0

PositionFunction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
DerivativeFunction = Callable[
    [np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
]


class GeometryError(ValueError):
    """Raised when a shape is invalid (non-positive radius, hole outside, ...)."""


class ContractViolation(ValueError):
    """Raised when a caller breaks a documented precondition."""


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Curve:
    """A smooth closed parametric curve.

    ``evaluator`` maps parameter arrays to coordinate arrays. When
    ``derivative_evaluator`` is missing, derivatives at equispaced nodes are
    obtained by spectral differentiation of the sampled positions.
    """

    name: str
    evaluator: PositionFunction
    derivative_evaluator: Optional[DerivativeFunction] = None
    parameters: Mapping[str, Any] = field(default_factory=dict)
    reversed_orientation: bool = False

    @property
    def derivative_mode(self) -> str:
        return "analytic" if self.derivative_evaluator is not None else "spectral"

    def position(self, t: Any) -> np.ndarray:
        """Return points with shape ``t.shape + (2,)``."""

        params = np.mod(np.asarray(t, dtype=float), TWO_PI)
        x1, x2 = self.evaluator(params)
        return np.stack([np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)], axis=-1)

    def reversed(self) -> "Curve":
        """Return the same point set traversed in the opposite direction."""

        evaluator = self.evaluator

        def _position(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return evaluator(np.mod(-t, TWO_PI))

        derivative: Optional[DerivativeFunction] = None
        if self.derivative_evaluator is not None:
            forward = self.derivative_evaluator

            def _derivatives(t: np.ndarray):
                d1x, d1y, d2x, d2y = forward(np.mod(-t, TWO_PI))
                return -d1x, -d1y, d2x, d2y

            derivative = _derivatives

        return Curve(
            name=self.name,
            evaluator=_position,
            derivative_evaluator=derivative,
            parameters=self.parameters,
            reversed_orientation=not self.reversed_orientation,
        )

    def analytic_derivatives(self, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.derivative_evaluator is None:
            raise ContractViolation(f"Curve '{self.name}' has no closed-form derivatives.")
        params = node_parameters(n_nodes)
        d1x, d1y, d2x, d2y = self.derivative_evaluator(params)
        first = np.stack([d1x, d1y], axis=-1).astype(float)
        second = np.stack([d2x, d2y], axis=-1).astype(float)
        return first, second

    def spectral_derivatives(self, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        samples = self.position(node_parameters(n_nodes))
        return spectral_derivatives(samples)

    def node_derivatives(self, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.derivative_evaluator is not None:
            return self.analytic_derivatives(n_nodes)
        return self.spectral_derivatives(n_nodes)

    def signed_area(self, n_nodes: int = QUERY_NODES) -> float:
        """Area enclosed by the curve, negative for clockwise traversal."""

        points = self.position(node_parameters(n_nodes))
        first, _ = self.node_derivatives(n_nodes)
        integrand = points[:, 0] * first[:, 1] - points[:, 1] * first[:, 0]
        return 0.5 * float(np.sum(integrand)) * TWO_PI / n_nodes

    def length(self, n_nodes: int = QUERY_NODES) -> float:
        first, _ = self.node_derivatives(n_nodes)
        return float(np.sum(np.hypot(first[:, 0], first[:, 1]))) * TWO_PI / n_nodes


def node_parameters(n_nodes: int) -> np.ndarray:
    """Equispaced parameters ``s_k = 2πk/N``."""

    return TWO_PI * np.arange(n_nodes) / n_nodes


def spectral_derivatives(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Differentiate periodic samples of shape ``(N, 2)`` through the FFT.

    The Nyquist mode is dropped for the first derivative and kept for the
    second, which keeps both results real for real input.
    """

    n_nodes = samples.shape[0]
    coefficients = np.fft.fft(samples, axis=0)
    wavenumbers = np.fft.fftfreq(n_nodes, d=1.0 / n_nodes)
    first_factor = 1j * wavenumbers
    if n_nodes % 2 == 0:
        first_factor[n_nodes // 2] = 0.0
    second_factor = -(wavenumbers**2)
    first = np.fft.ifft(first_factor[:, None] * coefficients, axis=0).real
    second = np.fft.ifft(second_factor[:, None] * coefficients, axis=0).real
    return first, second


def make_radial_curve(
    a0: float = 1.0,
    cos_terms: Optional[Mapping[int, float]] = None,
    sin_terms: Optional[Mapping[int, float]] = None,
    *,
    name: str = "radial",
) -> Curve:
    """Curve ``r(θ)(cos θ, sin θ)`` with a trigonometric radius.

    ``r(θ) = a0 + Σ ac_j cos jθ + Σ as_j sin jθ`` must stay positive.
    """

    cos_items = tuple(sorted((int(j), float(v)) for j, v in (cos_terms or {}).items()))
    sin_items = tuple(sorted((int(j), float(v)) for j, v in (sin_terms or {}).items()))
    for order, _ in cos_items + sin_items:
        if order < 1:
            raise GeometryError(f"Radial harmonic orders must be positive (got {order}).")
    a0 = float(a0)

    def _radius(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = np.full_like(theta, a0, dtype=float)
        dr = np.zeros_like(theta, dtype=float)
        ddr = np.zeros_like(theta, dtype=float)
        for order, amplitude in cos_items:
            r = r + amplitude * np.cos(order * theta)
            dr = dr - amplitude * order * np.sin(order * theta)
            ddr = ddr - amplitude * order**2 * np.cos(order * theta)
        for order, amplitude in sin_items:
            r = r + amplitude * np.sin(order * theta)
            dr = dr + amplitude * order * np.cos(order * theta)
            ddr = ddr - amplitude * order**2 * np.sin(order * theta)
        return r, dr, ddr

    samples = node_parameters(VALIDATION_SAMPLES)
    radius_samples, _, _ = _radius(samples)
    if not np.all(np.isfinite(radius_samples)) or float(np.min(radius_samples)) <= 0.0:
        raise GeometryError(
            f"Radial curve '{name}' has non-positive radius (min r = {float(np.min(radius_samples)):.4g})."
        )

    def _position(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r, _, _ = _radius(theta)
        return r * np.cos(theta), r * np.sin(theta)

    def _derivatives(theta: np.ndarray):
        r, dr, ddr = _radius(theta)
        cos_t = np.cos(theta)
        sin_t = np.sin(theta)
        d1x = dr * cos_t - r * sin_t
        d1y = dr * sin_t + r * cos_t
        d2x = ddr * cos_t - 2.0 * dr * sin_t - r * cos_t
        d2y = ddr * sin_t + 2.0 * dr * cos_t - r * sin_t
        return d1x, d1y, d2x, d2y

    return Curve(
        name=name,
        evaluator=_position,
        derivative_evaluator=_derivatives,
        parameters={"a0": a0, "cos": dict(cos_items), "sin": dict(sin_items)},
    )


def make_ellipse(a: float, b: float, *, name: str = "ellipse") -> Curve:
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0) or not (math.isfinite(a) and math.isfinite(b)):
        raise GeometryError(f"Ellipse semi-axes must be positive (got a={a}, b={b}).")

    def _position(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return a * np.cos(t), b * np.sin(t)

    def _derivatives(t: np.ndarray):
        cos_t = np.cos(t)
        sin_t = np.sin(t)
        return -a * sin_t, b * cos_t, -a * cos_t, -b * sin_t

    return Curve(
        name=name,
        evaluator=_position,
        derivative_evaluator=_derivatives,
        parameters={"a": a, "b": b},
    )


def make_crescent(*, name: str = "crescent") -> Curve:
    """Non-convex crescent; derivatives come from spectral differentiation."""

    def _position(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        exponent = 4.0 * (s - 1.5 * math.pi) * (s - 0.5 * math.pi)
        r = 0.2 / (1.0 + np.exp(exponent)) + 0.4
        theta = -(49.0 / 50.0) * math.pi * np.sin(s)
        return r * np.cos(theta), r * np.sin(theta)

    return Curve(name=name, evaluator=_position, parameters={})


# ---------------------------------------------------------------------------
# Boundaries
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Boundary:
    """An outer curve (counter-clockwise) and hole curves (clockwise)."""

    outer: Curve
    holes: Tuple[Curve, ...] = ()
    label: str = "domain"

    @property
    def curves(self) -> Tuple[Curve, ...]:
        return (self.outer,) + tuple(self.holes)

    @cached_property
    def area(self) -> float:
        return float(sum(curve.signed_area() for curve in self.curves))

    @cached_property
    def perimeter(self) -> float:
        return float(sum(curve.length() for curve in self.curves))

    @cached_property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        """``(x_min, x_max, y_min, y_max)`` of the outer curve."""

        points = self.outer.position(node_parameters(4 * QUERY_NODES))
        return (
            float(np.min(points[:, 0])),
            float(np.max(points[:, 0])),
            float(np.min(points[:, 1])),
            float(np.max(points[:, 1])),
        )

    @cached_property
    def is_star_shaped(self) -> bool:
        """Star-shaped with respect to the origin or the centroid of the outer nodes."""

        if self.holes:
            return False
        points = self.outer.position(node_parameters(QUERY_NODES))
        first, _ = self.outer.node_derivatives(QUERY_NODES)
        normals = np.stack([first[:, 1], -first[:, 0]], axis=-1)
        for centre in (np.zeros(2), np.mean(points, axis=0)):
            support = np.sum((points - centre) * normals, axis=1)
            if float(np.min(support)) > 0.0:
                return True
        return False


def make_boundary(
    outer: Curve,
    holes: Iterable[Curve] = (),
    *,
    label: str = "domain",
    validate: bool = True,
) -> Boundary:
    """Build a :class:`Boundary`, orienting each component consistently.

    The outer curve is reversed when it runs clockwise and each hole is
    reversed when it runs counter-clockwise. With ``validate`` the holes must
    lie strictly inside the outer curve and must not contain each other.
    """

    if outer.signed_area() < 0.0:
        outer = outer.reversed()
    oriented_holes = []
    for hole in holes:
        oriented_holes.append(hole.reversed() if hole.signed_area() > 0.0 else hole)
    boundary = Boundary(outer=outer, holes=tuple(oriented_holes), label=label)
    if validate and boundary.holes:
        _validate_holes(boundary)
    return boundary


def _validate_holes(boundary: Boundary) -> None:
    samples = node_parameters(VALIDATION_SAMPLES)
    for index, hole in enumerate(boundary.holes):
        points = hole.position(samples)
        if not np.all(_winding_numbers(boundary.outer, points, QUERY_NODES) != 0):
            raise GeometryError(f"Hole {index} ('{hole.name}') is not inside the outer curve.")
        for other_index, other in enumerate(boundary.holes):
            if other_index == index:
                continue
            if np.any(_winding_numbers(other, points, QUERY_NODES) != 0):
                raise GeometryError(f"Holes {index} and {other_index} overlap.")


# ---------------------------------------------------------------------------
# Discretisation
# ---------------------------------------------------------------------------
def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CurveNodes:
    """Node data of one curve at ``s_k = 2πk/N``."""

    curve: Curve
    params: np.ndarray
    points: np.ndarray
    first: np.ndarray
    second: np.ndarray
    speeds: np.ndarray
    normals: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.params.shape[0])

    @property
    def spacing(self) -> float:
        """Largest arc length between neighbouring nodes (approximated by |x'| h)."""

        return float(np.max(self.speeds)) * TWO_PI / self.n_nodes


def discretize_curve(curve: Curve, n_nodes: int) -> CurveNodes:
    if n_nodes < 4 or n_nodes % 2:
        raise ContractViolation(f"Node count must be even and at least 4 (got {n_nodes}).")
    params = node_parameters(n_nodes)
    points = curve.position(params)
    first, second = curve.node_derivatives(n_nodes)
    speeds = np.hypot(first[:, 0], first[:, 1])
    if not np.all(np.isfinite(points)) or not np.all(np.isfinite(first)):
        raise GeometryError(f"Curve '{curve.name}' produced non-finite samples.")
    if float(np.min(speeds)) <= 0.0:
        raise GeometryError(f"Curve '{curve.name}' has a vanishing tangent.")
    normals = np.stack([first[:, 1], -first[:, 0]], axis=-1) / speeds[:, None]
    return CurveNodes(
        curve=curve,
        params=_frozen(params),
        points=_frozen(points),
        first=_frozen(first),
        second=_frozen(second),
        speeds=_frozen(speeds),
        normals=_frozen(normals),
    )


@dataclass(frozen=True)
class DiscreteBoundary:
    """Per-curve node data plus the global row ordering (outer first, holes in order)."""

    boundary: Boundary
    curves: Tuple[CurveNodes, ...]

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(nodes.n_nodes for nodes in self.curves)

    @property
    def total_nodes(self) -> int:
        return int(sum(self.sizes))

    @property
    def offsets(self) -> Tuple[int, ...]:
        offsets = [0]
        for size in self.sizes[:-1]:
            offsets.append(offsets[-1] + size)
        return tuple(offsets)

    @cached_property
    def node_map(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(curve_index, node_index)`` for every global row."""

        curve_index = np.concatenate(
            [np.full(size, index, dtype=int) for index, size in enumerate(self.sizes)]
        )
        node_index = np.concatenate([np.arange(size) for size in self.sizes])
        return _frozen(curve_index), _frozen(node_index)

    @cached_property
    def points(self) -> np.ndarray:
        return _frozen(np.concatenate([nodes.points for nodes in self.curves], axis=0))

    @cached_property
    def first(self) -> np.ndarray:
        return _frozen(np.concatenate([nodes.first for nodes in self.curves], axis=0))

    @cached_property
    def speeds(self) -> np.ndarray:
        return _frozen(np.concatenate([nodes.speeds for nodes in self.curves]))

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid arc-length weights ``(2π/N)|x'(s_k)|``."""

        return _frozen(
            np.concatenate([nodes.speeds * TWO_PI / nodes.n_nodes for nodes in self.curves])
        )

    @property
    def max_spacing(self) -> float:
        return max(nodes.spacing for nodes in self.curves)

    @property
    def exclusion_distance(self) -> float:
        return EXCLUSION_FACTOR * self.max_spacing


def discretize(boundary: Boundary, n_nodes: int | Sequence[int]) -> DiscreteBoundary:
    """Discretise every curve; an integer applies the same ``N`` to all curves."""

    curves = boundary.curves
    if isinstance(n_nodes, (int, np.integer)):
        counts = [int(n_nodes)] * len(curves)
    else:
        counts = [int(value) for value in n_nodes]
        if len(counts) != len(curves):
            raise ContractViolation(
                f"Expected {len(curves)} node counts, got {len(counts)}."
            )
    nodes = tuple(discretize_curve(curve, count) for curve, count in zip(curves, counts))
    LOGGER.debug("Discretised '%s' with node counts %s", boundary.label, counts)
    return DiscreteBoundary(boundary=boundary, curves=nodes)


# ---------------------------------------------------------------------------
# Point queries
# ---------------------------------------------------------------------------
def _winding_numbers(curve: Curve, points: np.ndarray, n_nodes: int) -> np.ndarray:
    """Winding number of the curve around each point from wrapped angle increments.

    A point is settled once every polygon vertex lies farther away than the
    longest edge, so it cannot sit between an edge and its arc. The polygon
    is refined by doubling for the rest, up to ``MAX_QUERY_NODES``.
    """

    points = np.atleast_2d(np.asarray(points, dtype=float))
    result = np.zeros(points.shape[0], dtype=int)
    pending = np.arange(points.shape[0])
    count = n_nodes
    while pending.size:
        vertices = curve.position(node_parameters(count))
        edges = np.roll(vertices, -1, axis=0) - vertices
        longest = float(np.max(np.hypot(edges[:, 0], edges[:, 1])))
        last_pass = count >= MAX_QUERY_NODES
        rows = max(1, QUERY_CHUNK_ENTRIES // count)
        settled = np.empty(pending.size, dtype=bool)
        for start in range(0, pending.size, rows):
            index = pending[start : start + rows]
            dx = vertices[None, :, 0] - points[index, None, 0]
            dy = vertices[None, :, 1] - points[index, None, 1]
            angles = np.arctan2(dy, dx)
            steps = np.diff(angles, axis=1, append=angles[:, :1])
            steps = (steps + np.pi) % TWO_PI - np.pi
            result[index] = np.rint(np.sum(steps, axis=1) / TWO_PI).astype(int)
            nearest = np.min(np.hypot(dx, dy), axis=1)
            settled[start : start + index.size] = last_pass | (nearest > longest)
        pending = pending[~settled]
        count *= 2
    return result


def contains(boundary: Boundary, points: Any, *, n_nodes: int = QUERY_NODES) -> np.ndarray:
    """Return a boolean mask, ``True`` for points strictly inside the domain.

    Points closer to a curve than ``2π·max|x'|/MAX_QUERY_NODES`` or so are
    classified with the finest polygon and may land on either side.
    """

    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, 2)
    inside = _winding_numbers(boundary.outer, flat, n_nodes) != 0
    for hole in boundary.holes:
        inside &= _winding_numbers(hole, flat, n_nodes) == 0
    return inside.reshape(points.shape[:-1])


def distance_to_boundary(
    boundary: Boundary, points: Any, *, n_nodes: int = 4 * QUERY_NODES
) -> np.ndarray:
    """Distance from each point to the nearest of ``n_nodes`` samples per curve."""

    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, 2)
    samples = np.concatenate(
        [curve.position(node_parameters(n_nodes)) for curve in boundary.curves], axis=0
    )
    distances = np.empty(flat.shape[0], dtype=float)
    for start in range(0, flat.shape[0], EVAL_CHUNK_SIZE):
        chunk = flat[start : start + EVAL_CHUNK_SIZE]
        delta = chunk[:, None, :] - samples[None, :, :]
        distances[start : start + chunk.shape[0]] = np.min(np.hypot(delta[..., 0], delta[..., 1]), axis=1)
    return distances.reshape(points.shape[:-1])


@dataclass(frozen=True)
class InteriorGrid:
    """Regular grid over the bounding box with the accepted interior points."""

    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.ys.shape[0]), int(self.xs.shape[0])

    @property
    def cell_area(self) -> float:
        return float((self.xs[1] - self.xs[0]) * (self.ys[1] - self.ys[0]))

    @property
    def points(self) -> np.ndarray:
        """Accepted points in row-major (y, x) order."""

        grid_x, grid_y = np.meshgrid(self.xs, self.ys)
        return np.stack([grid_x[self.mask], grid_y[self.mask]], axis=-1)


def interior_grid(boundary: Boundary, nx: int, ny: int, exclusion: float) -> InteriorGrid:
    """Points of an ``nx × ny`` grid inside the domain and farther than ``exclusion`` from it."""

    if nx < 2 or ny < 2:
        raise ContractViolation(f"Grid needs at least 2 × 2 points (got {nx} × {ny}).")
    x_min, x_max, y_min, y_max = boundary.bounding_box
    xs = np.linspace(x_min, x_max, nx)
    ys = np.linspace(y_min, y_max, ny)
    grid_x, grid_y = np.meshgrid(xs, ys)
    points = np.stack([grid_x, grid_y], axis=-1)
    mask = contains(boundary, points)
    if np.any(mask):
        mask[mask] = distance_to_boundary(boundary, points[mask]) > exclusion
    return InteriorGrid(xs=_frozen(xs), ys=_frozen(ys), mask=_frozen(mask))


__all__ = [
    "Boundary",
    "ContractViolation",
    "Curve",
    "CurveNodes",
    "DiscreteBoundary",
    "GeometryError",
    "InteriorGrid",
    "contains",
    "discretize",
    "discretize_curve",
    "distance_to_boundary",
    "interior_grid",
    "make_boundary",
    "make_crescent",
    "make_ellipse",
    "make_radial_curve",
    "node_parameters",
    "spectral_derivatives",
]
