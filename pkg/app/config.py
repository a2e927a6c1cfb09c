"""Configuration loading utilities for the drum eigenvalue solver."""

from __future__ import annotations

import contextlib
import json
import logging
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Tuple


LOGGER = logging.getLogger(__name__)


_PERMISSION_SENTINEL = ".drum_eigen_write_check"

DEFAULT_N_RULE = "max(150,100+5*kappa)"
DEFAULT_N_RULE_RESONANT = "max(350,100+7*kappa)"


def _ensure_writable_directory(path: Path) -> bool:
    """Return ``True`` if *path* can be created and written to."""

    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return False

    test_file = path / _PERMISSION_SENTINEL
    try:
        with test_file.open("w", encoding="utf-8") as handle:
            handle.write("ok")
    except OSError:
        return False
    finally:
        with contextlib.suppress(OSError):
            test_file.unlink()

    return True


def _select_writable_directory(
    preferred: Path,
    *,
    label: str,
    fallbacks: Iterable[Path] = (),
) -> Tuple[Path, bool]:
    """Return a usable directory based on ``preferred`` and ``fallbacks``.

    The first writable candidate wins. A flag reports whether a fallback was
    used. When nothing can be prepared the original ``preferred`` path is
    returned and the bootstrapper reports the problem later.
    """

    preferred = preferred.resolve()
    if _ensure_writable_directory(preferred):
        return preferred, False

    seen: set[Path] = {preferred}
    for fallback in fallbacks:
        candidate = fallback.resolve()
        if candidate in seen:
            continue
        seen.add(candidate)
        if _ensure_writable_directory(candidate):
            LOGGER.warning(
                "Preferred %s directory '%s' is not writable; using fallback '%s'.",
                label,
                preferred,
                candidate,
            )
            return candidate, True

    LOGGER.warning(
        "%s directory '%s' is not writable and no fallback is available.",
        label.capitalize(),
        preferred,
    )
    return preferred, False


def _coerce_float(value: Any, default: float, *, positive: bool = True) -> float:
    try:
        result = float(value)
    except (TypeError, ValueError):
        return default
    if result != result or (positive and result <= 0):
        return default
    return result


def _coerce_int(value: Any, default: int, *, minimum: int = 1) -> int:
    try:
        result = int(value)
    except (TypeError, ValueError):
        return default
    if result < minimum:
        return default
    return result


@dataclass(frozen=True)
class SolverDefaults:
    """Numerical defaults shared by the solver, the studies and the CLI."""

    n_rule: str = DEFAULT_N_RULE
    n_rule_resonant: str = DEFAULT_N_RULE_RESONANT
    beta: float = 1e-14
    beta_resonant: float = 1e-12
    close_root_s: float = 1e-3
    coeff_decay_tol: float = 1e-12
    m_initial: int = 4
    m_max: int = 512
    circle_tol: float = 1e-2
    svd_tol: float = 1e-6
    window_min_width: float = 0.25
    window_target_roots: int = 10
    error_grid: int = 200
    threads: int = 1

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any] | None) -> "SolverDefaults":
        defaults = cls()
        if not mapping:
            return defaults

        def _rule(key: str, fallback: str) -> str:
            value = mapping.get(key)
            if isinstance(value, str) and value.strip():
                return value.strip()
            return fallback

        return cls(
            n_rule=_rule("n_rule", defaults.n_rule),
            n_rule_resonant=_rule("n_rule_resonant", defaults.n_rule_resonant),
            beta=_coerce_float(mapping.get("beta"), defaults.beta),
            beta_resonant=_coerce_float(mapping.get("beta_resonant"), defaults.beta_resonant),
            close_root_s=_coerce_float(mapping.get("close_root_s"), defaults.close_root_s),
            coeff_decay_tol=_coerce_float(mapping.get("coeff_decay_tol"), defaults.coeff_decay_tol),
            m_initial=_coerce_int(mapping.get("m_initial"), defaults.m_initial, minimum=2),
            m_max=_coerce_int(mapping.get("m_max"), defaults.m_max, minimum=2),
            circle_tol=_coerce_float(mapping.get("circle_tol"), defaults.circle_tol),
            svd_tol=_coerce_float(mapping.get("svd_tol"), defaults.svd_tol),
            window_min_width=_coerce_float(mapping.get("window_min_width"), defaults.window_min_width),
            window_target_roots=_coerce_int(
                mapping.get("window_target_roots"), defaults.window_target_roots
            ),
            error_grid=_coerce_int(mapping.get("error_grid"), defaults.error_grid, minimum=8),
            threads=_coerce_int(mapping.get("threads"), defaults.threads),
        )


@dataclass(frozen=True)
class AppConfig:
    """Runtime paths and numerical defaults for the application."""

    output_root: Path
    solver: SolverDefaults = field(default_factory=SolverDefaults)
    mode_grid: Tuple[int, int] = (200, 200)

    @property
    def modes_root(self) -> Path:
        """Directory receiving mode grids and renderings."""

        return (self.output_root / "modes").resolve()

    @classmethod
    def from_mapping(cls, mapping: Dict[str, Any], *, base_path: Path) -> "AppConfig":
        preferred_output = (base_path / mapping.get("output_root", "output")).resolve()
        output_fallbacks = (
            Path.home() / ".drum_eigen" / "output",
            Path(tempfile.gettempdir()) / "drum_eigen" / "output",
        )
        output_root, _ = _select_writable_directory(
            preferred_output,
            label="output",
            fallbacks=output_fallbacks,
        )

        solver = SolverDefaults.from_mapping(mapping.get("solver"))

        modes_section = mapping.get("modes") or {}
        raw_grid = modes_section.get("grid", (200, 200))
        try:
            nx, ny = (int(value) for value in raw_grid)
        except (TypeError, ValueError):
            nx, ny = 200, 200
        if nx < 2 or ny < 2:
            nx, ny = 200, 200

        return cls(output_root=output_root, solver=solver, mode_grid=(nx, ny))


def load_config(config_path: Path | None = None) -> AppConfig:
    """Load the application configuration from ``config/default.json`` by default."""

    base_path = Path(__file__).resolve().parent.parent
    if config_path is None:
        config_path = base_path / "config" / "default.json"

    with config_path.open("r", encoding="utf-8") as config_file:
        raw_config = json.load(config_file)

    return AppConfig.from_mapping(raw_config, base_path=base_path)


__all__ = [
    "AppConfig",
    "DEFAULT_N_RULE",
    "DEFAULT_N_RULE_RESONANT",
    "SolverDefaults",
    "load_config",
]
