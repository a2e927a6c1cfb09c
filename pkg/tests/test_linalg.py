from __future__ import annotations

import math

import numpy as np
import pytest

from app.numerics.linalg import (
    DegeneratePolynomialError,
    DeterminantOverflowError,
    companion_roots,
    lowest_singular_values,
    lu_det,
    min_singular,
)


def test_determinant_of_small_matrices() -> None:
    assert lu_det(np.diag([2.0, 3.0])).to_complex() == pytest.approx(6.0)
    assert lu_det(np.array([[0.0, 1.0], [1.0, 0.0]])).to_complex() == pytest.approx(-1.0)
    assert lu_det(np.array([[1.0, 2.0], [2.0, 4.0]])).is_zero


def test_determinant_matches_numpy_for_random_complex_matrix() -> None:
    rng = np.random.default_rng(7)
    matrix = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))

    determinant = lu_det(matrix)
    sign, logdet = np.linalg.slogdet(matrix)

    assert 1.0 <= abs(determinant.mantissa) < 2.0
    assert determinant.log10_abs == pytest.approx(logdet / math.log(10.0), rel=1e-12)
    assert determinant.to_complex() / abs(determinant) == pytest.approx(sign, abs=1e-10)


def test_large_determinants_stay_representable_in_scaled_form() -> None:
    determinant = lu_det(np.eye(300) * 1e3)

    assert determinant.log10_abs == pytest.approx(900.0, rel=1e-12)
    with pytest.raises(DeterminantOverflowError):
        determinant.to_complex()


def test_non_finite_entries_give_non_finite_mantissa() -> None:
    matrix = np.eye(3)
    matrix[1, 2] = np.nan

    assert not math.isfinite(abs(lu_det(matrix).mantissa))


def test_min_singular_triplet_satisfies_both_identities() -> None:
    rng = np.random.default_rng(3)
    matrix = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))

    triplet = min_singular(matrix)

    assert triplet.sigma == pytest.approx(np.linalg.svd(matrix, compute_uv=False)[-1])
    assert np.linalg.norm(matrix @ triplet.right) == pytest.approx(triplet.sigma, rel=1e-10)
    assert np.linalg.norm(triplet.left.conj() @ matrix) == pytest.approx(triplet.sigma, rel=1e-10)


def test_lowest_singular_values_are_ascending() -> None:
    values = lowest_singular_values(np.diag([5.0, 1e-3, 2.0]), 2)

    assert values.tolist() == pytest.approx([1e-3, 2.0])


def test_companion_roots_trims_negligible_leading_terms() -> None:
    roots = companion_roots([2.0, -3.0, 1.0, 1e-20])

    assert sorted(roots.real) == pytest.approx([1.0, 2.0])
    assert np.allclose(roots.imag, 0.0, atol=1e-12)


def test_companion_roots_rejects_zero_polynomial() -> None:
    with pytest.raises(DegeneratePolynomialError):
        companion_roots([0.0, 0.0])
    assert companion_roots([3.0]).size == 0
