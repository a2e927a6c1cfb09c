"""Bootstrap logic that prepares output directories and validates defaults."""

from __future__ import annotations

import logging
from pathlib import Path

from . import config as config_module
from .config import AppConfig, load_config

LOGGER = logging.getLogger(__name__)


class BootstrapError(RuntimeError):
    """Raised when initialization cannot be completed."""


class Bootstrapper:
    """High level object orchestrating initialization steps."""

    def __init__(self, config: AppConfig) -> None:
        self._config = config

    @property
    def config(self) -> AppConfig:
        return self._config

    def initialize(self) -> None:
        """Run all bootstrap tasks."""

        LOGGER.debug("Starting bootstrap sequence")
        self._ensure_directories()
        self._check_solver_defaults()
        LOGGER.info("Bootstrap completed successfully")

    def _ensure_directories(self) -> None:
        for label, path in (
            ("output", self._config.output_root),
            ("modes", self._config.modes_root),
        ):
            if not config_module._ensure_writable_directory(path):
                raise BootstrapError(
                    f"{label.capitalize()} directory '{path}' is not writable. "
                    "Update config/default.json or adjust permissions."
                )
            LOGGER.debug("Ensured %s directory exists and is writable: %s", label, path)

    def _check_solver_defaults(self) -> None:
        solver = self._config.solver
        if solver.m_initial > solver.m_max:
            raise BootstrapError(
                f"Solver setting m_initial={solver.m_initial} exceeds m_max={solver.m_max}."
            )
        # The SVD window is [kappa - 5s, kappa + 5s]; it must stay narrower than a solve window.
        if 10.0 * solver.close_root_s >= solver.window_min_width:
            raise BootstrapError(
                "Solver setting close_root_s is too large for window_min_width; "
                "the SVD fallback window would cover a whole solve window."
            )
        LOGGER.debug("Solver defaults validated: %s", solver)


def initialize_app(config_path: Path | None = None) -> AppConfig:
    """Load configuration and prepare runtime directories."""

    config = load_config(config_path)
    Bootstrapper(config).initialize()
    return config


__all__ = ["Bootstrapper", "BootstrapError", "initialize_app"]
