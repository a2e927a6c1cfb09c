from __future__ import annotations

import numpy as np
import pytest
from scipy import special

from app.config import SolverDefaults
from app.services.modes import (
    EmptyGridError,
    NotAnEigenfrequencyError,
    boundary_densities,
    boundary_density,
    compute_mode,
    compute_modes,
    evaluate_mode,
    mode_residual,
)
from app.services.solver import SolveOptions, solve_interval

J01 = 2.404825557695773
J11 = 3.831705970207512


def test_disk_mode_matches_bessel_profile(disk) -> None:
    mode = compute_mode(disk, J01, (41, 41))

    grid_x, grid_y = np.meshgrid(mode.xs, mode.ys)
    radii = np.hypot(grid_x, grid_y)[mode.mask]
    cell = (mode.xs[1] - mode.xs[0]) * (mode.ys[1] - mode.ys[0])
    expected = special.j0(J01 * radii)
    expected /= np.sqrt(np.sum(expected**2) * cell)

    assert mode.accepted > 100
    assert np.max(np.abs(mode.values[mode.mask] - expected)) <= 1e-6
    assert np.all(mode.values[~mode.mask] == 0.0)
    assert float(np.sum(mode.values**2) * cell) == pytest.approx(1.0)
    assert mode.bbox == pytest.approx((-1.0, 1.0, -1.0, 1.0), abs=1e-12)
    assert mode.sigma_min < 1e-6


def test_boundary_ratio_is_tiny_only_at_eigenfrequency(disk) -> None:
    at_root = mode_residual(disk, boundary_density(disk, J01))
    away = mode_residual(disk, boundary_density(disk, 3.0, svd_tol=None))

    assert at_root <= 1e-9
    assert away > 1e-3


def test_mode_request_off_eigenfrequency_is_rejected(disk) -> None:
    with pytest.raises(NotAnEigenfrequencyError):
        compute_mode(disk, 3.0, (20, 20))


def test_grid_without_interior_points_raises(disk) -> None:
    density = boundary_density(disk, J01)

    with pytest.raises(EmptyGridError):
        evaluate_mode(disk, density, (2, 2))


def test_disk_density_is_constant_for_the_radial_mode(disk) -> None:
    values = boundary_density(disk, J01, n_nodes=150).values

    mean = np.mean(values)
    assert np.max(np.abs(values - mean)) <= 1e-8 * abs(mean)


def test_disk_densities_span_cos_and_sin_for_a_double_eigenfrequency(disk) -> None:
    densities = boundary_densities(disk, J11, count=2, n_nodes=150)

    params = densities[0].discretization.curves[0].params
    basis = np.column_stack([np.cos(params), np.sin(params)]).astype(complex)
    for density in densities:
        coefficients, *_ = np.linalg.lstsq(basis, density.values, rcond=None)
        residual = np.linalg.norm(basis @ coefficients - density.values)
        assert residual <= 1e-7 * np.linalg.norm(density.values)
        assert density.sigma_min <= 1e-10


def test_double_eigenfrequency_modes_are_orthonormal_bessel_profiles(disk) -> None:
    modes = compute_modes(disk, J11, (61, 61), multiplicity=2, n_nodes=150)

    first, second = modes
    cell = (first.xs[1] - first.xs[0]) * (first.ys[1] - first.ys[0])
    assert np.array_equal(first.mask, second.mask)
    assert float(np.sum(first.values**2) * cell) == pytest.approx(1.0)
    assert float(np.sum(second.values**2) * cell) == pytest.approx(1.0)
    assert abs(float(np.sum(first.values * second.values) * cell)) <= 1e-4

    grid_x, grid_y = np.meshgrid(first.xs, first.ys)
    x, y = grid_x[first.mask], grid_y[first.mask]
    radial = special.j1(J11 * np.hypot(x, y))
    theta = np.arctan2(y, x)
    basis = np.column_stack([radial * np.cos(theta), radial * np.sin(theta)])
    for mode in modes:
        samples = mode.values[mode.mask]
        coefficients, *_ = np.linalg.lstsq(basis, samples, rcond=None)
        assert np.max(np.abs(basis @ coefficients - samples)) <= 1e-6 * np.max(np.abs(samples))


def test_mode_satisfies_helmholtz_equation_on_the_grid(radial_shape) -> None:
    options = SolveOptions.from_defaults(
        SolverDefaults(), n_nodes=100, estimate_errors=False, weyl_audit=False
    )
    kappa = solve_interval(radial_shape, 2.0, 4.8, options).results[0].kappa
    x_min, x_max, y_min, y_max = radial_shape.bounding_box
    spacing = 0.01
    grid = (int(round((x_max - x_min) / spacing)) + 1, int(round((y_max - y_min) / spacing)) + 1)

    mode = compute_mode(radial_shape, kappa, grid, n_nodes=100)

    u, mask = mode.values, mode.mask
    hx = mode.xs[1] - mode.xs[0]
    hy = mode.ys[1] - mode.ys[0]
    centre = u[1:-1, 1:-1]
    laplacian = (u[1:-1, 2:] - 2 * centre + u[1:-1, :-2]) / hx**2 + (
        u[2:, 1:-1] - 2 * centre + u[:-2, 1:-1]
    ) / hy**2
    stencil = mask[1:-1, 1:-1] & mask[1:-1, 2:] & mask[1:-1, :-2] & mask[2:, 1:-1] & mask[:-2, 1:-1]
    residual = np.abs(laplacian + kappa**2 * centre)[stencil]
    assert stencil.sum() > 1000
    assert np.max(residual) <= 1e-3 * kappa**2 * np.max(np.abs(u))
