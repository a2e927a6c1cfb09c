from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app.bootstrap import Bootstrapper
from app.config import AppConfig
from app.numerics.geometry import Boundary, make_boundary, make_ellipse, make_radial_curve


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run full-interval acceptance tests",
    )


def pytest_collection_modifyitems(config: pytest.Config, items) -> None:
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture()
def disk() -> Boundary:
    return make_boundary(make_ellipse(1.0, 1.0), label="disk-r1")


@pytest.fixture()
def radial_shape() -> Boundary:
    curve = make_radial_curve(1.0, {3: 0.2}, {2: 0.3})
    return make_boundary(curve, label="radial")


@pytest.fixture()
def temp_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> AppConfig:
    config_dir = tmp_path / "config"
    config_dir.mkdir()
    config_file = config_dir / "default.json"
    config_file.write_text(
        json.dumps({"output_root": str(tmp_path / "output"), "modes": {"grid": [40, 40]}}),
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)

    config = AppConfig.from_mapping(
        {"output_root": "output", "modes": {"grid": [40, 40]}},
        base_path=tmp_path,
    )

    Bootstrapper(config).initialize()
    return config


@pytest.fixture()
def config_file(temp_config: AppConfig, tmp_path: Path) -> Path:
    return tmp_path / "config" / "default.json"
