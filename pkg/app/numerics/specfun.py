"""Bessel and Hankel functions of order 0 and 1 for real arguments.

Values away from the origin come from :mod:`scipy.special`; for
``x <= SMALL_ARGUMENT_SWITCH`` the power series are summed directly so that
the logarithmic singularity of ``Y_n`` is represented explicitly.
"""

from __future__ import annotations

import math
from typing import Any, Tuple

import numpy as np
from scipy import special


EULER_GAMMA = float(np.euler_gamma)
SMALL_ARGUMENT_SWITCH = 0.25
SERIES_TERMS = 20


class SpecialFunctionDomainError(ValueError):
    """Raised for unsupported orders or arguments outside the real domain."""


def _series_coefficients() -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    k = np.arange(SERIES_TERMS)
    factorials = np.array([math.factorial(int(value)) for value in k], dtype=float)
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, SERIES_TERMS))])
    sign = (-1.0) ** k
    j0 = sign / factorials**2
    j1 = sign / (factorials * factorials * (k + 1))
    y0 = -sign * harmonic / factorials**2
    # psi(k+1) + psi(k+2) = -2γ + H_k + H_{k+1}
    psi_sum = -2.0 * EULER_GAMMA + harmonic + (harmonic + 1.0 / (k + 1))
    y1 = sign * psi_sum / (factorials * factorials * (k + 1))
    return j0, j1, y0, y1


_J0_SERIES, _J1_SERIES, _Y0_SERIES, _Y1_SERIES = _series_coefficients()


def _as_real_array(x: Any) -> np.ndarray:
    array = np.asarray(x)
    if np.iscomplexobj(array):
        raise SpecialFunctionDomainError("Bessel arguments must be real.")
    return array.astype(float, copy=False)


def _check_order(order: int) -> int:
    if order not in (0, 1):
        raise SpecialFunctionDomainError(f"Only orders 0 and 1 are supported (got {order}).")
    return int(order)


def _check_positive(x: np.ndarray) -> None:
    if np.any(~(x > 0.0)):
        raise SpecialFunctionDomainError("Y_n and H_n^(1) require strictly positive arguments.")


def _power_series(coefficients: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(q, coefficients)


def small_argument_forms(order: int, x: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(J_n(x), Y_n(x))`` from the ascending series.

    Accurate to double precision for ``0 < x <= SMALL_ARGUMENT_SWITCH`` and
    usable, with slowly growing cancellation, a little beyond.
    """

    order = _check_order(order)
    x = _as_real_array(x)
    _check_positive(x)
    q = 0.25 * x * x
    log_half = np.log(0.5 * x)
    if order == 0:
        j = _power_series(_J0_SERIES, q)
        y = (2.0 / math.pi) * ((log_half + EULER_GAMMA) * j + _power_series(_Y0_SERIES, q))
        return j, y
    j = 0.5 * x * _power_series(_J1_SERIES, q)
    y = (
        -2.0 / (math.pi * x)
        + (2.0 / math.pi) * log_half * j
        - (0.5 * x / math.pi) * _power_series(_Y1_SERIES, q)
    )
    return j, y


def bessel_j(order: int, x: Any) -> np.ndarray:
    order = _check_order(order)
    x = _as_real_array(x)
    return special.j0(x) if order == 0 else special.j1(x)


def bessel_y(order: int, x: Any) -> np.ndarray:
    order = _check_order(order)
    x = _as_real_array(x)
    _check_positive(x)
    values = special.y0(x) if order == 0 else special.y1(x)
    small = x <= SMALL_ARGUMENT_SWITCH
    if np.any(small):
        values = np.array(values, dtype=float, copy=True)
        _, series = small_argument_forms(order, x[small])
        values[small] = series
    return values


def hankel1(order: int, x: Any) -> np.ndarray:
    """``H_n^(1)(x) = J_n(x) + i Y_n(x)``."""

    return bessel_j(order, x) + 1j * bessel_y(order, x)


def j1_over_x(x: Any) -> np.ndarray:
    """``J_1(x)/x`` with the removable singularity filled in (value 1/2 at 0)."""

    x = _as_real_array(x)
    result = np.empty_like(x, dtype=float)
    small = np.abs(x) <= SMALL_ARGUMENT_SWITCH
    result[small] = 0.5 * _power_series(_J1_SERIES, 0.25 * x[small] ** 2)
    large = ~small
    result[large] = special.j1(x[large]) / x[large]
    return result


__all__ = [
    "EULER_GAMMA",
    "SMALL_ARGUMENT_SWITCH",
    "SpecialFunctionDomainError",
    "bessel_j",
    "bessel_y",
    "hankel1",
    "j1_over_x",
    "small_argument_forms",
]
