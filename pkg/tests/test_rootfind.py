from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from app.numerics.rootfind import (
    BoydOptions,
    NoConvergenceError,
    Root,
    boyd_find_roots,
    chebyshev_coefficients,
    deduplicate_roots,
    grid_parabolic_min,
)
from app.numerics.rootfind import _decay_reference

RELAXED = BoydOptions(beta_max=1e-9, min_subdivision_width=0.05)


def test_chebyshev_coefficients_of_known_polynomial() -> None:
    m = 8
    x = np.cos(np.pi * np.arange(m + 1) / m)
    samples = 3.0 + 2.0 * x + (2.0 * x**2 - 1.0)

    coefficients = chebyshev_coefficients(samples.astype(complex))

    # Interior coefficients carry half the Chebyshev weight
    assert coefficients[0].real == pytest.approx(3.0)
    assert coefficients[1].real == pytest.approx(1.0)
    assert coefficients[2].real == pytest.approx(0.5)
    assert np.allclose(coefficients[3:], 0.0, atol=1e-14)


def test_finds_every_root_of_cosine() -> None:
    result = boyd_find_roots(np.cos, 1.0, 10.0, RELAXED)

    expected = [0.5 * math.pi, 1.5 * math.pi, 2.5 * math.pi]
    assert result.kappas == pytest.approx(expected, abs=1e-10)
    assert all(abs(root.beta) <= 1e-9 for root in result)
    assert result.evaluations > 0
    assert result.m_final >= 4


def test_planted_roots_of_complex_valued_function() -> None:
    planted = [2.1, 2.35, 3.7]

    def g(x: float) -> complex:
        return complex(np.prod([x - root for root in planted])) * np.exp(1j * x)

    result = boyd_find_roots(g, 2.0, 4.0, RELAXED)

    assert result.kappas == pytest.approx(planted, abs=1e-10)


def test_no_roots_when_function_has_none() -> None:
    result = boyd_find_roots(lambda x: x * x + 1.0, 0.0, 2.0, RELAXED)

    assert len(result) == 0


def test_complex_pair_near_axis_is_not_reported() -> None:
    result = boyd_find_roots(lambda x: (x - 1.5) ** 2 + 0.04, 1.0, 2.0, RELAXED)

    assert len(result) == 0


def test_executor_gives_same_roots() -> None:
    with ThreadPoolExecutor(max_workers=2) as executor:
        parallel = boyd_find_roots(np.sin, 2.0, 7.0, RELAXED, executor=executor)
    serial = boyd_find_roots(np.sin, 2.0, 7.0, RELAXED)

    assert parallel.kappas == pytest.approx(serial.kappas)
    assert parallel.kappas == pytest.approx([math.pi, 2.0 * math.pi], abs=1e-10)


def test_evaluation_budget_raises_with_diagnostics() -> None:
    options = BoydOptions(m_max=8, max_evaluations=20)

    with pytest.raises(NoConvergenceError) as excinfo:
        boyd_find_roots(lambda x: np.exp(50.0 * x) * np.sin(40.0 * x), 0.0, 1.0, options)

    assert "evaluations" in excinfo.value.diagnostics


def test_invalid_interval_and_options_raise() -> None:
    with pytest.raises(ValueError):
        boyd_find_roots(np.cos, 2.0, 1.0)
    with pytest.raises(ValueError):
        BoydOptions(m_initial=16, m_max=8)
    with pytest.raises(ValueError):
        BoydOptions(beta_max=0.0)


def test_deduplicate_keeps_smaller_beta() -> None:
    roots = [Root(1.0, 1e-13), Root(1.0 + 1e-14, 0.0), Root(2.0, 0.0)]

    merged = deduplicate_roots(roots)

    assert [root.kappa for root in merged] == pytest.approx([1.0, 2.0])
    assert merged[0].beta == 0.0


def test_grid_parabolic_min_refines_simple_minima() -> None:
    minima = grid_parabolic_min(lambda x: (x - 0.3137) ** 2, 0.0, 1.0, 11, 1e-12, scan_depth=0)

    assert len(minima) == 1
    assert minima[0][0] == pytest.approx(0.3137, abs=1e-6)


def test_grid_parabolic_min_finds_hidden_neighbour() -> None:
    def h(x: float) -> float:
        return min((x - 0.5) ** 2, (x - 0.5004) ** 2 + 1e-10)

    minima = grid_parabolic_min(h, 0.0, 1.0, 11, 1e-12, scan_depth=2)

    locations = [x for x, _ in minima]
    assert len(locations) == 2
    assert locations == pytest.approx([0.5, 0.5004], abs=1e-6)


def test_grid_parabolic_min_validates_arguments() -> None:
    with pytest.raises(ValueError):
        grid_parabolic_min(lambda x: x, 0.0, 1.0, 2, 1e-8)


def test_split_double_root_is_handed_over_without_subdivision() -> None:
    def g(x: float) -> complex:
        return (x - 2.5) ** 2 * (x - 3.3) * np.exp(0.5j * x)

    clustered = boyd_find_roots(
        g, 2.0, 4.0, BoydOptions(cluster_gap=1e-3, min_subdivision_width=1e-2)
    )
    bisected = boyd_find_roots(g, 2.0, 4.0, BoydOptions(min_subdivision_width=1e-2))

    assert clustered.subdivisions == 0
    assert clustered.kappas == pytest.approx([3.3], abs=1e-12)
    assert len(clustered.unresolved) == 2
    assert np.mean([root.kappa for root in clustered.unresolved]) == pytest.approx(2.5, abs=1e-9)
    assert bisected.subdivisions > 0
    assert clustered.evaluations < bisected.evaluations


def test_isolated_loose_root_is_still_bisected() -> None:
    options = BoydOptions(beta_max=1e-30, cluster_gap=1e-3, min_subdivision_width=0.5)

    result = boyd_find_roots(lambda x: np.sin(x) * np.exp(0.3j * x), 2.0, 4.0, options)

    found = result.kappas + [root.kappa for root in result.unresolved]
    assert result.subdivisions > 0
    assert found == pytest.approx([math.pi], abs=1e-10)


def test_mean_free_function_uses_largest_coefficient_for_decay() -> None:
    result = boyd_find_roots(lambda x: np.sin(x - 3.0), 2.0, 4.0, RELAXED)

    assert result.kappas == pytest.approx([3.0], abs=1e-12)
    assert result.subdivisions == 0
    assert result.m_final <= 32


def test_decay_reference_prefers_leading_coefficient() -> None:
    assert _decay_reference(np.array([1e-2, 1.0, 1e-3]), 1e-12) == 1e-2
    assert _decay_reference(np.array([1e-20, 1.0, 1e-3]), 1e-12) == 1.0
    assert _decay_reference(np.array([0.0, 0.0]), 1e-12) == 0.0
