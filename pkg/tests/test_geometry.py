"""Tests for curves, discretisation and point queries."""

from __future__ import annotations

import math

import numpy as np
import pytest

from app.numerics.geometry import (
    ContractViolation,
    GeometryError,
    contains,
    discretize,
    discretize_curve,
    distance_to_boundary,
    interior_grid,
    make_boundary,
    make_crescent,
    make_ellipse,
    make_radial_curve,
    spectral_derivatives,
)


def test_disk_area_perimeter_and_star_shape(disk) -> None:
    assert disk.area == pytest.approx(math.pi, rel=1e-12)
    assert disk.perimeter == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert disk.is_star_shaped
    assert disk.bounding_box == pytest.approx((-1.0, 1.0, -1.0, 1.0), abs=1e-12)


def test_radial_area_matches_closed_form(radial_shape) -> None:
    # π (a0² + ½ Σ (ac_j² + as_j²))
    assert radial_shape.area == pytest.approx(math.pi * 1.065, rel=1e-12)


def test_radial_curve_rejects_non_positive_radius() -> None:
    with pytest.raises(GeometryError):
        make_radial_curve(0.3, {2: 0.5})


def test_ellipse_rejects_non_positive_axes() -> None:
    with pytest.raises(GeometryError):
        make_ellipse(1.0, 0.0)


def test_clockwise_outer_curve_is_reversed() -> None:
    clockwise = make_ellipse(1.0, 0.5).reversed()
    assert clockwise.signed_area() < 0.0

    boundary = make_boundary(clockwise)

    assert boundary.outer.signed_area() > 0.0
    assert boundary.area == pytest.approx(0.5 * math.pi, rel=1e-12)


def test_holes_are_stored_clockwise_and_subtract_area() -> None:
    boundary = make_boundary(make_ellipse(1.0, 1.0), [make_ellipse(0.4, 0.4)])

    assert boundary.holes[0].signed_area() < 0.0
    assert boundary.area == pytest.approx(math.pi * (1.0 - 0.16), rel=1e-12)
    assert not boundary.is_star_shaped


def test_hole_outside_outer_curve_is_rejected() -> None:
    with pytest.raises(GeometryError):
        make_boundary(make_ellipse(1.0, 1.0), [make_ellipse(1.5, 0.2)])


def test_normals_point_out_of_domain_on_every_curve() -> None:
    boundary = make_boundary(make_ellipse(1.0, 1.0), [make_ellipse(0.4, 0.4)])
    disc = discretize(boundary, 32)

    outer, hole = disc.curves
    outward = np.sum(outer.normals * outer.points, axis=1)
    towards_centre = np.sum(hole.normals * hole.points, axis=1) / 0.4

    assert np.all(outward > 0.99)
    assert np.all(towards_centre < -0.99)


def test_discretize_rejects_odd_node_counts(disk) -> None:
    with pytest.raises(ContractViolation):
        discretize(disk, 31)
    with pytest.raises(ContractViolation):
        discretize(disk, [32, 32])


def test_quadrature_weights_sum_to_perimeter(disk) -> None:
    disc = discretize(disk, 64)

    assert disc.total_nodes == 64
    assert float(np.sum(disc.quadrature_weights)) == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert disc.exclusion_distance == pytest.approx(5.0 * 2.0 * math.pi / 64, rel=1e-12)


def test_spectral_derivatives_match_analytic_ones() -> None:
    curve = make_radial_curve(1.0, {3: 0.2}, {2: 0.3})
    analytic_first, analytic_second = curve.analytic_derivatives(64)

    first, second = spectral_derivatives(curve.position(2.0 * math.pi * np.arange(64) / 64))

    assert np.allclose(first, analytic_first, atol=1e-10)
    assert np.allclose(second, analytic_second, atol=1e-9)


def test_crescent_uses_spectral_derivatives_and_is_not_star_shaped() -> None:
    crescent = make_boundary(make_crescent())
    nodes = discretize_curve(crescent.outer, 128)

    assert crescent.outer.derivative_mode == "spectral"
    assert np.all(nodes.speeds > 0.0)
    assert crescent.area > 0.0
    assert not crescent.is_star_shaped


def test_contains_excludes_holes_and_exterior() -> None:
    boundary = make_boundary(make_ellipse(1.0, 1.0), [make_ellipse(0.4, 0.4)])
    points = np.array([[0.0, 0.0], [0.7, 0.0], [1.5, 0.0], [0.0, -0.8]])

    assert contains(boundary, points).tolist() == [False, True, False, True]


@pytest.mark.parametrize("offset", [1e-3, 1e-6])
def test_contains_is_sharp_next_to_the_disk_boundary(disk, offset: float) -> None:
    angles = np.linspace(0.0, 2.0 * math.pi, 17)[:-1]
    ring = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    assert np.all(contains(disk, (1.0 - offset) * ring))
    assert not np.any(contains(disk, (1.0 + offset) * ring))


def test_contains_is_sharp_next_to_radial_curve_and_hole(radial_shape) -> None:
    angles = np.linspace(0.0, 2.0 * math.pi, 37)[:-1]
    edge = radial_shape.outer.position(angles)

    assert np.all(contains(radial_shape, (1.0 - 1e-5) * edge))
    assert not np.any(contains(radial_shape, (1.0 + 1e-5) * edge))

    annulus = make_boundary(make_ellipse(1.0, 1.0), [make_ellipse(0.4, 0.4)])
    near_hole = np.array([[0.4 + 1e-4, 0.0], [0.4 - 1e-4, 0.0], [0.0, -0.4 - 1e-4]])
    assert contains(annulus, near_hole).tolist() == [True, False, True]


def test_distance_to_boundary_on_disk(disk) -> None:
    distances = distance_to_boundary(disk, np.array([[0.0, 0.0], [0.5, 0.0]]))

    assert distances == pytest.approx([1.0, 0.5], abs=1e-4)


def test_interior_grid_masks_points_near_the_boundary(disk) -> None:
    grid = interior_grid(disk, 41, 41, 0.1)

    radii = np.hypot(grid.points[:, 0], grid.points[:, 1])
    assert grid.shape == (41, 41)
    assert grid.cell_area == pytest.approx(0.05**2)
    assert np.all(radii < 0.9 + 1e-3)
    assert grid.points.shape[0] == int(np.count_nonzero(grid.mask))


def test_interior_grid_needs_two_points_per_axis(disk) -> None:
    with pytest.raises(ContractViolation):
        interior_grid(disk, 1, 10, 0.0)
