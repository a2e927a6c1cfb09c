"""Nyström matrices for the double- and single-layer Helmholtz operators.

Same-curve blocks use the logarithmic split ``K = K1 ln(4 sin²((t-s)/2)) + K2``
with product-quadrature weights for the ``K1`` part and the trapezoid rule for
``K2``. Blocks coupling two different curves have smooth kernels and use the
trapezoid rule only. The double-layer matrix ``M`` discretises ``2D`` and the
single-layer matrix ``Q`` discretises ``2S``; the system matrix is
``A = I - M - iηQ``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla

from .geometry import CurveNodes, DiscreteBoundary, TWO_PI
from .specfun import EULER_GAMMA, bessel_j, hankel1, j1_over_x


LOGGER = logging.getLogger(__name__)

COINCIDENCE_TOL = 1e-14
EVAL_CHUNK_SIZE = 1024


class AssemblyContractError(ValueError):
    """Raised for κ <= 0, η·κ < 0 or densities of the wrong length."""


@dataclass(frozen=True)
class KernelSplit:
    """Kernel value with its logarithmic coefficient and smooth remainder."""

    value: np.ndarray
    log_part: np.ndarray
    smooth_part: np.ndarray


@dataclass(frozen=True)
class OperatorMatrix:
    """System matrix ``I - M - iηQ`` and its ingredients at one wavenumber."""

    matrix: np.ndarray
    double_layer: np.ndarray
    single_layer: Optional[np.ndarray]
    kappa: float
    eta: float
    discretization: DiscreteBoundary

    @property
    def representation(self) -> str:
        return "dlp" if self.eta == 0.0 else "cfie"

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])


# ---------------------------------------------------------------------------
# Quadrature weights
# ---------------------------------------------------------------------------
def kress_weights(n_nodes: int, t: np.ndarray | float) -> np.ndarray:
    """Product-quadrature weights ``R_k(t)`` for ``∫ ln(4 sin²((t-s)/2)) f(s) ds``.

    Returns an array of shape ``(len(t), N)``.
    """

    if n_nodes < 4 or n_nodes % 2:
        raise AssemblyContractError(f"Node count must be even and at least 4 (got {n_nodes}).")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    params = TWO_PI * np.arange(n_nodes) / n_nodes
    offsets = t[:, None] - params[None, :]
    total = np.zeros_like(offsets)
    for m in range(1, n_nodes // 2):
        total += np.cos(m * offsets) / m
    half = n_nodes // 2
    return -(2.0 * TWO_PI / n_nodes) * total - (2.0 * TWO_PI / n_nodes**2) * np.cos(half * offsets)


@lru_cache(maxsize=32)
def kress_weight_matrix(n_nodes: int) -> np.ndarray:
    """Circulant matrix ``R_{|i-j|}(0)``."""

    row = kress_weights(n_nodes, 0.0)[0]
    # R_k(0) is even in k, so the first column equals the first row.
    matrix = sla.circulant(row)
    matrix.setflags(write=False)
    return matrix


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------
def _kernel_blocks(
    target_points: np.ndarray,
    target_params: Optional[np.ndarray],
    source: CurveNodes,
    kappa: float,
    *,
    single_layer: bool,
) -> Tuple[KernelSplit, Optional[KernelSplit]]:
    """Double-layer (and optionally single-layer) kernels between targets and nodes.

    ``target_params`` is given only when the targets lie on the source curve;
    the logarithmic split is then formed and coincident pairs receive the
    analytic diagonal limits.
    """

    dx = target_points[:, None, 0] - source.points[None, :, 0]
    dy = target_points[:, None, 1] - source.points[None, :, 1]
    r = np.hypot(dx, dy)
    cross = source.first[None, :, 1] * dx - source.first[None, :, 0] * dy
    shape = r.shape

    same_curve = target_params is not None
    if same_curve:
        sin_half = np.sin(0.5 * (target_params[:, None] - source.params[None, :]))
        coincident = np.abs(sin_half) < COINCIDENCE_TOL
        log_term = np.zeros(shape)
        log_term[~coincident] = np.log(4.0 * sin_half[~coincident] ** 2)
    else:
        coincident = np.zeros(shape, dtype=bool)
        log_term = np.zeros(shape)
    regular = ~coincident
    kr = kappa * r[regular]

    l_value = np.zeros(shape, dtype=complex)
    l_value[regular] = 0.5j * kappa * cross[regular] * hankel1(1, kr) / r[regular]
    l_log = np.zeros(shape)
    l_log[regular] = -(kappa**2 / TWO_PI) * cross[regular] * j1_over_x(kr)
    l_smooth = l_value - l_log * log_term

    rows, cols = np.nonzero(coincident)
    if rows.size:
        first = source.first[cols]
        second = source.second[cols]
        curvature = (second[:, 0] * first[:, 1] - second[:, 1] * first[:, 0]) / (
            TWO_PI * source.speeds[cols] ** 2
        )
        l_smooth[rows, cols] = curvature
        l_value[rows, cols] = curvature
    double = KernelSplit(value=l_value, log_part=l_log, smooth_part=l_smooth)

    if not single_layer:
        return double, None

    speeds = np.broadcast_to(source.speeds[None, :], shape)
    q_value = np.zeros(shape, dtype=complex)
    q_value[regular] = 0.5j * hankel1(0, kr) * speeds[regular]
    q_log = -bessel_j(0, kappa * r) * speeds / TWO_PI
    q_smooth = q_value - q_log * log_term
    if rows.size:
        speed = source.speeds[cols]
        diagonal = (
            0.5j - EULER_GAMMA / math.pi - np.log(0.5 * kappa * speed) / math.pi
        ) * speed
        q_smooth[rows, cols] = diagonal
        q_value[rows, cols] = diagonal
    single = KernelSplit(value=q_value, log_part=q_log, smooth_part=q_smooth)
    return double, single


def _global_to_local(disc: DiscreteBoundary, index: int) -> Tuple[int, int]:
    if not 0 <= index < disc.total_nodes:
        raise AssemblyContractError(f"Node index {index} is out of range.")
    curve_index, node_index = disc.node_map
    return int(curve_index[index]), int(node_index[index])


def _entry(disc: DiscreteBoundary, i: int, j: int, kappa: float, *, single: bool) -> KernelSplit:
    _check_kappa(kappa)
    target_curve, target_node = _global_to_local(disc, i)
    source_curve, source_node = _global_to_local(disc, j)
    target = disc.curves[target_curve]
    source = disc.curves[source_curve]
    params = target.params[[target_node]] if target_curve == source_curve else None
    double, single_split = _kernel_blocks(
        target.points[[target_node]], params, source, kappa, single_layer=single
    )
    split = single_split if single else double
    return KernelSplit(
        value=complex(split.value[0, source_node]),
        log_part=complex(split.log_part[0, source_node]),
        smooth_part=complex(split.smooth_part[0, source_node]),
    )


def kernel_l(disc: DiscreteBoundary, i: int, j: int, kappa: float) -> KernelSplit:
    """Double-layer kernel ``L`` and its split between global nodes ``i`` and ``j``."""

    return _entry(disc, i, j, kappa, single=False)


def kernel_q(disc: DiscreteBoundary, i: int, j: int, kappa: float) -> KernelSplit:
    """Single-layer kernel ``Q`` (for ``2S``) and its split."""

    return _entry(disc, i, j, kappa, single=True)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------
def _check_kappa(kappa: float) -> None:
    if not (math.isfinite(kappa) and kappa > 0.0):
        raise AssemblyContractError(f"Wavenumber must be positive and finite (got {kappa}).")


def resolve_eta(kappa: float, eta: Optional[float]) -> float:
    """Coupling parameter; ``None`` selects the default ``η = κ``."""

    value = float(kappa) if eta is None else float(eta)
    if not math.isfinite(value) or value * kappa < 0.0:
        raise AssemblyContractError(f"Coupling parameter must satisfy η·κ >= 0 (got η={value}).")
    return value


def assemble(
    disc: DiscreteBoundary,
    kappa: float,
    eta: Optional[float] = None,
    *,
    keep_single_layer: bool = False,
) -> OperatorMatrix:
    """Assemble ``A = I - M - iηQ`` for every curve pair of ``disc``."""

    kappa = float(kappa)
    _check_kappa(kappa)
    eta = resolve_eta(kappa, eta)
    need_single = eta != 0.0 or keep_single_layer

    total = disc.total_nodes
    double_layer = np.zeros((total, total), dtype=complex)
    single_layer = np.zeros((total, total), dtype=complex) if need_single else None
    offsets = disc.offsets

    for a, target in enumerate(disc.curves):
        rows = slice(offsets[a], offsets[a] + target.n_nodes)
        for b, source in enumerate(disc.curves):
            cols = slice(offsets[b], offsets[b] + source.n_nodes)
            weight = TWO_PI / source.n_nodes
            if a == b:
                double, single = _kernel_blocks(
                    target.points, target.params, source, kappa, single_layer=need_single
                )
                weights = kress_weight_matrix(source.n_nodes)
                double_layer[rows, cols] = weights * double.log_part + weight * double.smooth_part
                if single_layer is not None:
                    single_layer[rows, cols] = weights * single.log_part + weight * single.smooth_part
            else:
                double, single = _kernel_blocks(
                    target.points, None, source, kappa, single_layer=need_single
                )
                double_layer[rows, cols] = weight * double.value
                if single_layer is not None:
                    single_layer[rows, cols] = weight * single.value

    matrix = np.eye(total, dtype=complex) - double_layer
    if eta != 0.0:
        matrix -= 1j * eta * single_layer
    return OperatorMatrix(
        matrix=matrix,
        double_layer=double_layer,
        single_layer=single_layer,
        kappa=kappa,
        eta=eta,
        discretization=disc,
    )


def nystrom_interpolate(
    disc: DiscreteBoundary,
    density: np.ndarray,
    t: np.ndarray | float,
    kappa: float,
    *,
    curve_index: int = 0,
    eta: float = 0.0,
) -> np.ndarray:
    """Evaluate ``(M_N + iηQ_N) ψ`` at arbitrary parameters on one curve.

    At ``t = s_i`` this reproduces row ``i`` of the matrix product exactly.
    """

    _check_kappa(kappa)
    density = np.asarray(density)
    if density.shape != (disc.total_nodes,):
        raise AssemblyContractError(
            f"Density has shape {density.shape}, expected ({disc.total_nodes},)."
        )
    target = disc.curves[curve_index]
    params = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), TWO_PI)
    points = target.curve.position(params)
    need_single = eta != 0.0
    result = np.zeros(params.shape[0], dtype=complex)
    offsets = disc.offsets

    for b, source in enumerate(disc.curves):
        block = density[offsets[b] : offsets[b] + source.n_nodes]
        weight = TWO_PI / source.n_nodes
        if b == curve_index:
            double, single = _kernel_blocks(points, params, source, kappa, single_layer=need_single)
            weights = kress_weights(source.n_nodes, params)
            result += (weights * double.log_part + weight * double.smooth_part) @ block
            if single is not None:
                result += 1j * eta * ((weights * single.log_part + weight * single.smooth_part) @ block)
        else:
            double, single = _kernel_blocks(points, None, source, kappa, single_layer=need_single)
            result += weight * (double.value @ block)
            if single is not None:
                result += 1j * eta * weight * (single.value @ block)
    return result


def layer_potential(
    disc: DiscreteBoundary,
    density: np.ndarray,
    points: np.ndarray,
    kappa: float,
    *,
    double_weight: float = 1.0,
    single_weight: complex = 0.0,
) -> np.ndarray:
    """``double_weight·𝒟φ + single_weight·𝒮φ`` at points off the boundary.

    Uses the plain trapezoid rule, which is accurate a few node spacings away
    from the curves.
    """

    _check_kappa(kappa)
    density = np.asarray(density)
    if density.shape != (disc.total_nodes,):
        raise AssemblyContractError(
            f"Density has shape {density.shape}, expected ({disc.total_nodes},)."
        )
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.zeros(points.shape[0], dtype=complex)
    offsets = disc.offsets
    for start in range(0, points.shape[0], EVAL_CHUNK_SIZE):
        chunk = points[start : start + EVAL_CHUNK_SIZE]
        accumulated = np.zeros(chunk.shape[0], dtype=complex)
        for b, source in enumerate(disc.curves):
            block = density[offsets[b] : offsets[b] + source.n_nodes]
            weight = TWO_PI / source.n_nodes
            dx = chunk[:, None, 0] - source.points[None, :, 0]
            dy = chunk[:, None, 1] - source.points[None, :, 1]
            r = np.hypot(dx, dy)
            kr = kappa * r
            if double_weight != 0.0:
                cross = source.first[None, :, 1] * dx - source.first[None, :, 0] * dy
                kernel = 0.25j * kappa * cross * hankel1(1, kr) / r
                accumulated += double_weight * weight * (kernel @ block)
            if single_weight != 0.0:
                kernel = 0.25j * hankel1(0, kr) * source.speeds[None, :]
                accumulated += single_weight * weight * (kernel @ block)
        values[start : start + chunk.shape[0]] = accumulated
    return values


__all__ = [
    "AssemblyContractError",
    "KernelSplit",
    "OperatorMatrix",
    "assemble",
    "kernel_l",
    "kernel_q",
    "kress_weight_matrix",
    "kress_weights",
    "layer_potential",
    "nystrom_interpolate",
    "resolve_eta",
]
