"""Eigenmodes on a grid from the null vector of the double-layer matrix.

At an eigenfrequency the normal derivative ``ψ = ∂u/∂n`` spans the left null
space of ``I - M_N``. The mode is the single-layer potential of ``ψ``, real up
to a global phase, normalised to unit L² norm over the accepted grid points.
A doubly degenerate eigenfrequency gives two orthonormal real modes, one per
low singular vector.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..numerics.geometry import Boundary, DiscreteBoundary, InteriorGrid, interior_grid
from ..numerics.linalg import smallest_singular_triplets
from ..numerics.operator import assemble, layer_potential
from .events import emit_task_event
from .solver import discretize_total


LOGGER = logging.getLogger(__name__)

DEFAULT_SVD_TOL = 1e-6
DEFAULT_NODES = 200
DEPENDENT_MODES = 1e-6


class NotAnEigenfrequencyError(ValueError):
    """Raised when ``σ_min`` at the requested wavenumber exceeds the tolerance."""


class EmptyGridError(ValueError):
    """Raised when no grid point survives the interior and distance tests."""


@dataclass(frozen=True)
class BoundaryDensity:
    """Normal derivative of a mode at the boundary nodes."""

    kappa: float
    discretization: DiscreteBoundary
    values: np.ndarray
    sigma_min: float


@dataclass(frozen=True)
class ModeGrid:
    """Real mode values on a grid; zero outside the accepted region."""

    kappa: float
    bbox: Tuple[float, float, float, float]
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray
    values: np.ndarray
    sigma_min: float
    norm_constant: float

    @property
    def nx(self) -> int:
        return int(self.xs.shape[0])

    @property
    def ny(self) -> int:
        return int(self.ys.shape[0])

    @property
    def accepted(self) -> int:
        return int(np.count_nonzero(self.mask))


def boundary_densities(
    boundary: Boundary,
    kappa: float,
    *,
    count: int = 1,
    n_nodes: Optional[int] = None,
    svd_tol: Optional[float] = DEFAULT_SVD_TOL,
) -> List[BoundaryDensity]:
    """``ψ = ∂u/∂n`` from the ``count`` lowest left singular vectors of ``I - M_N(κ)``.

    ``count=2`` spans the mode space of a doubly degenerate eigenfrequency;
    every singular value used must then be below ``svd_tol``. ``svd_tol=None``
    skips the eigenfrequency check.
    """

    if count < 1:
        raise ValueError(f"Need at least one density (got count={count}).")
    disc = discretize_total(boundary, n_nodes or DEFAULT_NODES)
    operator = assemble(disc, kappa, eta=0.0)
    triplets = smallest_singular_triplets(operator.matrix, count)
    densities: List[BoundaryDensity] = []
    for position, triplet in enumerate(triplets, start=1):
        if svd_tol is not None and triplet.sigma > svd_tol:
            raise NotAnEigenfrequencyError(
                f"κ={kappa:.12g} is not an eigenfrequency of multiplicity {position} "
                f"at this resolution (σ_{position}={triplet.sigma:.3e} > {svd_tol:.1e})."
            )
        densities.append(
            BoundaryDensity(
                kappa=float(kappa),
                discretization=disc,
                values=np.conj(triplet.left) / disc.quadrature_weights,
                sigma_min=triplet.sigma,
            )
        )
    return densities


def boundary_density(
    boundary: Boundary,
    kappa: float,
    *,
    n_nodes: Optional[int] = None,
    svd_tol: Optional[float] = DEFAULT_SVD_TOL,
) -> BoundaryDensity:
    """Density of the lowest singular vector; see :func:`boundary_densities`."""

    return boundary_densities(boundary, kappa, n_nodes=n_nodes, svd_tol=svd_tol)[0]


def _real_phase(values: np.ndarray) -> complex:
    """Unit phase that makes the largest-magnitude sample real and positive."""

    peak = values[int(np.argmax(np.abs(values)))]
    return peak / abs(peak) if peak != 0 else 1.0 + 0j


def _field(density: BoundaryDensity, points: np.ndarray) -> np.ndarray:
    return layer_potential(
        density.discretization,
        density.values,
        points,
        density.kappa,
        double_weight=0.0,
        single_weight=1.0,
    )


def _accepted_grid(
    boundary: Boundary, disc: DiscreteBoundary, grid: Tuple[int, int]
) -> InteriorGrid:
    nx, ny = grid
    interior = interior_grid(boundary, nx, ny, disc.exclusion_distance)
    if not np.any(interior.mask):
        raise EmptyGridError(
            f"No point of the {nx} × {ny} grid lies inside '{boundary.label}' "
            "away from the boundary."
        )
    return interior


def _mode_grid(
    boundary: Boundary,
    interior: InteriorGrid,
    density: BoundaryDensity,
    samples: np.ndarray,
    norm: float,
) -> ModeGrid:
    values = np.zeros(interior.shape)
    values[interior.mask] = samples
    emit_task_event(
        "mode",
        "Mode evaluated",
        payload={
            "kappa": density.kappa,
            "grid": f"{interior.xs.shape[0]}x{interior.ys.shape[0]}",
            "accepted": int(np.count_nonzero(interior.mask)),
            "sigma_min": density.sigma_min,
        },
        level=logging.DEBUG,
    )
    return ModeGrid(
        kappa=density.kappa,
        bbox=boundary.bounding_box,
        xs=interior.xs,
        ys=interior.ys,
        mask=interior.mask,
        values=values,
        sigma_min=density.sigma_min,
        norm_constant=norm,
    )


def evaluate_mode(
    boundary: Boundary,
    density: BoundaryDensity,
    grid: Tuple[int, int] = (200, 200),
) -> ModeGrid:
    """Evaluate ``u = 𝒮ψ`` on an ``nx × ny`` grid over the bounding box.

    Points outside the domain or within five node spacings of the boundary
    are masked. The result has unit discrete L² norm over the accepted points.
    """

    interior = _accepted_grid(boundary, density.discretization, grid)
    field_values = _field(density, interior.points)
    real = (field_values / _real_phase(field_values)).real
    norm = math.sqrt(float(np.sum(real**2)) * interior.cell_area)
    if norm == 0.0:
        raise EmptyGridError("Mode vanishes on every accepted grid point.")
    return _mode_grid(boundary, interior, density, real / norm, norm)


def evaluate_modes(
    boundary: Boundary,
    densities: Sequence[BoundaryDensity],
    grid: Tuple[int, int] = (200, 200),
) -> List[ModeGrid]:
    """Real, L²-orthonormal modes spanning the fields of ``densities``.

    The real and imaginary parts of every field are stacked and the leading
    left singular vectors of that sample matrix are kept, one per density.
    Each mode's largest-magnitude sample is positive.
    """

    if len(densities) == 1:
        return [evaluate_mode(boundary, densities[0], grid)]
    interior = _accepted_grid(boundary, densities[0].discretization, grid)
    fields = np.column_stack([_field(density, interior.points) for density in densities])
    stacked = np.hstack([fields.real, fields.imag])
    basis, weights, _ = np.linalg.svd(stacked, full_matrices=False)
    if weights[len(densities) - 1] <= DEPENDENT_MODES * weights[0]:
        raise EmptyGridError(
            f"Only {int(np.sum(weights > DEPENDENT_MODES * weights[0]))} independent "
            f"mode(s) at κ={densities[0].kappa:.12g} on the accepted grid."
        )
    scale = math.sqrt(interior.cell_area)
    modes: List[ModeGrid] = []
    for index, density in enumerate(densities):
        column = basis[:, index]
        column = column * math.copysign(1.0, column[int(np.argmax(np.abs(column)))])
        modes.append(
            _mode_grid(boundary, interior, density, column / scale, float(weights[index]) * scale)
        )
    return modes


def compute_mode(
    boundary: Boundary,
    kappa: float,
    grid: Tuple[int, int] = (200, 200),
    *,
    n_nodes: Optional[int] = None,
    svd_tol: Optional[float] = DEFAULT_SVD_TOL,
) -> ModeGrid:
    """Density extraction followed by grid evaluation."""

    density = boundary_density(boundary, kappa, n_nodes=n_nodes, svd_tol=svd_tol)
    return evaluate_mode(boundary, density, grid)


def compute_modes(
    boundary: Boundary,
    kappa: float,
    grid: Tuple[int, int] = (200, 200),
    *,
    multiplicity: int = 1,
    n_nodes: Optional[int] = None,
    svd_tol: Optional[float] = DEFAULT_SVD_TOL,
) -> List[ModeGrid]:
    """One orthonormal mode per unit of multiplicity at ``κ``."""

    densities = boundary_densities(
        boundary, kappa, count=multiplicity, n_nodes=n_nodes, svd_tol=svd_tol
    )
    return evaluate_modes(boundary, densities, grid)


def mode_residual(
    boundary: Boundary,
    density: BoundaryDensity,
    *,
    resolution: int = 128,
) -> float:
    """``t[u] = ‖u‖_{L²(∂Ω)} / ‖u‖_{L²(Ω)}`` for ``u = 𝒮ψ``.

    The boundary trace of the single-layer potential is ``½ Q_N ψ``. The ratio
    is small for a true Dirichlet mode and does not depend on the scale of ``ψ``.
    """

    disc = density.discretization
    operator = assemble(disc, density.kappa, eta=0.0, keep_single_layer=True)
    trace = 0.5 * (operator.single_layer @ density.values)
    boundary_norm = math.sqrt(float(np.sum(disc.quadrature_weights * np.abs(trace) ** 2)))

    interior = interior_grid(boundary, resolution, resolution, disc.exclusion_distance)
    if not np.any(interior.mask):
        raise EmptyGridError("No interior grid point available for the residual norm.")
    field_values = _field(density, interior.points)
    norm = math.sqrt(float(np.sum(np.abs(field_values) ** 2)) * interior.cell_area)
    if norm == 0.0:
        raise EmptyGridError("Mode vanishes on every accepted grid point.")
    return boundary_norm / norm


__all__ = [
    "BoundaryDensity",
    "EmptyGridError",
    "ModeGrid",
    "NotAnEigenfrequencyError",
    "boundary_densities",
    "boundary_density",
    "compute_mode",
    "compute_modes",
    "evaluate_mode",
    "evaluate_modes",
    "mode_residual",
]
