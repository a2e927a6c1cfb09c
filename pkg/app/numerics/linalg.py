"""Dense complex linear algebra: scaled determinants, SVD and companion roots."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy import linalg as sla


LOGGER = logging.getLogger(__name__)

LOG10_TWO = math.log10(2.0)
COMPANION_TRIM = 1e-14
_PRODUCT_CHUNK = 256


class DegeneratePolynomialError(ValueError):
    """Raised when every polynomial coefficient vanishes."""


class DeterminantOverflowError(ArithmeticError):
    """Raised when a scaled determinant is not representable as a complex float."""


def _normalise(mantissa: complex, exponent: int) -> tuple[complex, int]:
    magnitude = abs(mantissa)
    if magnitude == 0.0 or not math.isfinite(magnitude):
        return complex(mantissa), 0 if magnitude == 0.0 else exponent
    _, shift = math.frexp(magnitude)
    # frexp gives [0.5, 1); keep the mantissa in [1, 2).
    return complex(mantissa) / math.ldexp(1.0, shift - 1), exponent + shift - 1


@dataclass(frozen=True)
class ScaledDeterminant:
    """``mantissa * 2**exponent`` with ``|mantissa|`` in ``[1, 2)`` or exactly zero."""

    mantissa: complex
    exponent: int

    def __mul__(self, other: "ScaledDeterminant") -> "ScaledDeterminant":
        if not isinstance(other, ScaledDeterminant):
            return NotImplemented
        mantissa, exponent = _normalise(
            self.mantissa * other.mantissa, self.exponent + other.exponent
        )
        return ScaledDeterminant(mantissa, exponent)

    def __abs__(self) -> float:
        return math.ldexp(abs(self.mantissa), self.exponent)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def log10_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log10(abs(self.mantissa)) + self.exponent * LOG10_TWO

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        try:
            real = math.ldexp(self.mantissa.real, self.exponent)
            imag = math.ldexp(self.mantissa.imag, self.exponent)
        except OverflowError as error:
            raise DeterminantOverflowError(
                f"Determinant 2^{self.exponent} scale overflows a double."
            ) from error
        if real == 0.0 and imag == 0.0:
            raise DeterminantOverflowError(
                f"Determinant 2^{self.exponent} scale underflows a double."
            )
        return complex(real, imag)


def lu_det(matrix: np.ndarray) -> ScaledDeterminant:
    """Determinant of a square matrix through partial-pivoting LU.

    Non-finite entries give a non-finite mantissa. A zero pivot gives an
    exact zero.
    """

    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Determinant needs a square matrix (got shape {matrix.shape}).")
    size = matrix.shape[0]
    if size == 0:
        return ScaledDeterminant(1 + 0j, 0)
    if not np.all(np.isfinite(matrix)):
        return ScaledDeterminant(complex(math.nan, math.nan), 0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, pivots = sla.lu_factor(matrix, check_finite=False)
    diagonal = np.diag(lu).astype(complex)
    if np.any(diagonal == 0):
        return ScaledDeterminant(0j, 0)

    swaps = int(np.count_nonzero(pivots != np.arange(size)))
    magnitudes = np.abs(diagonal)
    fractions, exponents = np.frexp(magnitudes)
    exponent = int(np.sum(exponents, dtype=np.int64))
    phase = complex(np.prod(diagonal / magnitudes))
    product = 1.0
    for start in range(0, size, _PRODUCT_CHUNK):
        product *= float(np.prod(fractions[start : start + _PRODUCT_CHUNK]))
        product, shift = math.frexp(product)
        exponent += shift
    if swaps % 2:
        phase = -phase
    mantissa, exponent = _normalise(product * phase, exponent)
    return ScaledDeterminant(mantissa, exponent)


class SingularTriplet(NamedTuple):
    """A singular value with its right (``v``) and left (``u``) vectors."""

    sigma: float
    right: np.ndarray
    left: np.ndarray


def _svd(matrix: np.ndarray):
    try:
        return sla.svd(matrix, check_finite=False)
    except np.linalg.LinAlgError:
        LOGGER.warning("gesdd did not converge; retrying the SVD with gesvd")
        return sla.svd(matrix, check_finite=False, lapack_driver="gesvd")


def smallest_singular_triplets(matrix: np.ndarray, count: int = 1) -> List[SingularTriplet]:
    """The ``count`` smallest singular triplets, ascending in ``σ``."""

    u_matrix, singular_values, vh_matrix = _svd(np.asarray(matrix))
    size = singular_values.shape[0]
    return [
        SingularTriplet(
            sigma=float(singular_values[index]),
            right=vh_matrix[index].conj(),
            left=u_matrix[:, index],
        )
        for index in range(size - 1, max(size - count, 0) - 1, -1)
    ]


def min_singular(matrix: np.ndarray) -> SingularTriplet:
    """Return ``σ_min`` with unit vectors satisfying ``‖A v‖ = σ`` and ``‖u* A‖ = σ``."""

    return smallest_singular_triplets(matrix, 1)[0]


def lowest_singular_values(matrix: np.ndarray, count: int = 2) -> np.ndarray:
    """Ascending array of the ``count`` smallest singular values."""

    values = sla.svdvals(np.asarray(matrix), check_finite=False)
    return np.sort(values)[:count]


def companion_roots(coefficients: Sequence[complex]) -> np.ndarray:
    """Roots of ``Σ c_m z^m`` given ``c_0..c_d`` (low to high).

    Leading coefficients below ``COMPANION_TRIM`` times the largest magnitude
    are dropped before the companion matrix is formed.
    """

    coeffs = np.asarray(coefficients, dtype=complex).ravel()
    if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
        raise DegeneratePolynomialError("Polynomial coefficients are empty or non-finite.")
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        raise DegeneratePolynomialError("All polynomial coefficients vanish.")
    degree = coeffs.size - 1
    while degree > 0 and abs(coeffs[degree]) < COMPANION_TRIM * scale:
        degree -= 1
    if degree == 0:
        return np.empty(0, dtype=complex)
    matrix = sla.companion(coeffs[: degree + 1][::-1])
    return sla.eigvals(matrix, check_finite=False)


__all__ = [
    "DegeneratePolynomialError",
    "DeterminantOverflowError",
    "ScaledDeterminant",
    "SingularTriplet",
    "companion_roots",
    "lowest_singular_values",
    "lu_det",
    "min_singular",
    "smallest_singular_triplets",
]
