"""Tests for the Nyström layer-operator matrices."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from app.numerics.geometry import discretize
from app.numerics.linalg import min_singular
from app.numerics.operator import (
    AssemblyContractError,
    assemble,
    kernel_l,
    kress_weight_matrix,
    kress_weights,
    layer_potential,
    nystrom_interpolate,
    resolve_eta,
    _kernel_blocks,
)

DISK_J01 = 2.404825557695773


def test_kress_weights_integrate_log_kernel_exactly() -> None:
    n_nodes = 32
    params = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    weights = kress_weights(n_nodes, 0.0)[0]

    # ∫ ln(4 sin²(s/2)) ds = 0 and ∫ ln(4 sin²(s/2)) cos(ms) ds = -2π/m
    assert float(np.sum(weights)) == pytest.approx(0.0, abs=1e-13)
    assert float(weights @ np.cos(params)) == pytest.approx(-2.0 * math.pi, rel=1e-12)
    assert float(weights @ np.cos(3 * params)) == pytest.approx(-2.0 * math.pi / 3, rel=1e-12)


def test_kress_weight_matrix_is_symmetric_circulant() -> None:
    matrix = kress_weight_matrix(16)

    assert np.allclose(matrix, matrix.T)
    assert np.allclose(matrix[3], np.roll(matrix[0], 3))


def test_double_layer_diagonal_uses_curvature_limit(disk) -> None:
    disc = discretize(disk, 32)

    split = kernel_l(disc, 5, 5, 3.0)

    assert split.value == pytest.approx(-1.0 / (2.0 * math.pi))
    assert split.log_part == 0


def test_double_layer_matrix_is_singular_at_disk_eigenfrequency(disk) -> None:
    disc = discretize(disk, 64)

    at_root = min_singular(assemble(disc, DISK_J01, eta=0.0).matrix).sigma
    away = min_singular(assemble(disc, 3.0, eta=0.0).matrix).sigma

    assert at_root < 1e-8
    assert away > 1e-3


def test_combined_matrix_is_singular_at_disk_eigenfrequency(disk) -> None:
    operator = assemble(discretize(disk, 64), DISK_J01)

    assert operator.eta == pytest.approx(DISK_J01)
    assert operator.representation == "cfie"
    assert operator.single_layer is not None
    assert min_singular(operator.matrix).sigma < 1e-8


def test_double_layer_only_skips_single_layer_unless_requested(disk) -> None:
    disc = discretize(disk, 16)

    assert assemble(disc, 2.0, eta=0.0).single_layer is None
    assert assemble(disc, 2.0, eta=0.0, keep_single_layer=True).single_layer is not None


def test_nystrom_interpolation_reproduces_matrix_rows(disk) -> None:
    disc = discretize(disk, 24)
    rng = np.random.default_rng(11)
    density = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    kappa, eta = 4.2, 1.5
    operator = assemble(disc, kappa, eta=eta)
    params = disc.curves[0].params

    interpolated = nystrom_interpolate(disc, density, params, kappa, eta=eta)

    expected = (operator.double_layer + 1j * eta * operator.single_layer) @ density
    assert np.allclose(interpolated, expected, rtol=1e-10, atol=1e-12)


def test_single_layer_potential_of_constant_density_at_centre(disk) -> None:
    disc = discretize(disk, 32)
    kappa = 2.7

    value = layer_potential(
        disc, np.ones(32), np.array([[0.0, 0.0]]), kappa, double_weight=0.0, single_weight=1.0
    )

    assert value[0] == pytest.approx(0.5j * math.pi * special.hankel1(0, kappa), rel=1e-12)


def test_contract_violations_raise(disk) -> None:
    disc = discretize(disk, 16)

    with pytest.raises(AssemblyContractError):
        assemble(disc, 0.0)
    with pytest.raises(AssemblyContractError):
        resolve_eta(2.0, -1.0)
    with pytest.raises(AssemblyContractError):
        layer_potential(disc, np.ones(15), np.zeros((1, 2)), 1.0)
    assert resolve_eta(2.0, None) == 2.0


@pytest.mark.parametrize("single_layer", [False, True])
def test_kernel_diagonal_matches_extrapolated_near_diagonal_limit(radial_shape, single_layer) -> None:
    source = discretize(radial_shape, 64).curves[0]
    curve = radial_shape.curves[0]
    node, kappa, step = 5, 3.0, 1e-3

    def _smooth_part(offset: float) -> complex:
        params = np.array([source.params[node] + offset])
        double, single = _kernel_blocks(
            curve.position(params), params, source, kappa, single_layer=single_layer
        )
        split = single if single_layer else double
        return complex(split.smooth_part[0, node])

    near = [_smooth_part(step / 2**level) for level in range(3)]
    # Remove the O(h) and O(h²) terms of the analytic smooth part.
    extrapolated = (8.0 * near[2] - 6.0 * near[1] + near[0]) / 3.0

    assert abs(_smooth_part(0.0) - extrapolated) <= 1e-6
