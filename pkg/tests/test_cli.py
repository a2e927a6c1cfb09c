"""Tests for the command-line entry point."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

import run
from app.numerics.linalg import DeterminantOverflowError
from app.numerics.rootfind import NoConvergenceError
from app.services.solver import EigResult, SolveReport, WeylAudit


runner = CliRunner()

DISK = '{"type": "ellipse", "a": 1.0, "b": 1.0}'
J01 = 2.404825557695773
J11 = 3.831705970207512


@pytest.fixture()
def shipped_grid_config(tmp_path: Path) -> Path:
    path = tmp_path / "matching.json"
    path.write_text(
        json.dumps({"output_root": str(tmp_path / "output"), "modes": {"grid": [200, 200]}}),
        encoding="utf-8",
    )
    return path


def test_shapes_json_lists_catalogue() -> None:
    result = runner.invoke(run.cli, ["shapes", "--json"])

    assert result.exit_code == 0
    entries = json.loads(result.stdout)
    assert [entry["type"] for entry in entries] == ["radial", "ellipse", "crescent", "annulus"]


def test_shapes_console_style() -> None:
    result = runner.invoke(run.cli, ["shapes", "--style", "console"])

    assert result.exit_code == 0
    assert "Shape: crescent (resonant)" in result.stdout


def test_selftest_passes_with_matching_config(shipped_grid_config: Path) -> None:
    result = runner.invoke(run.cli, ["selftest", "--config", str(shipped_grid_config)])

    assert result.exit_code == 0
    assert "All defaults agree." in result.stdout


def test_selftest_flags_changed_defaults(config_file: Path) -> None:
    result = runner.invoke(run.cli, ["selftest", "--config", str(config_file)])

    assert result.exit_code == run.EXIT_BAD_INPUT
    assert "MISMATCH mode grid" in result.stdout


def test_selftest_checks_cover_boyd_defaults(temp_config) -> None:
    names = [name for name, _, _ in run.selftest_checks(temp_config)]

    assert {"beta", "m_initial", "m_max", "circle_tol", "close_root_s"} <= set(names)


def test_solve_writes_report(config_file: Path, tmp_path: Path) -> None:
    target = tmp_path / "disk.json"

    result = runner.invoke(
        run.cli,
        [
            "solve",
            "--shape", DISK,
            "--interval", "2", "2.6",
            "--n", "64",
            "--no-errors",
            "--style", "console",
            "--out", str(target),
            "--config", str(config_file),
        ],
    )

    assert result.exit_code == 0, result.stdout
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert payload["representation"] == "cfie"
    [value] = payload["eigenfrequencies"]
    assert value["kappa"] == pytest.approx(J01, abs=1e-9)
    assert value["N"] == 64
    assert "Report saved to:" in result.stdout


def test_solve_rejects_unknown_shape(config_file: Path) -> None:
    result = runner.invoke(
        run.cli,
        ["solve", "--shape", '{"type": "square"}', "--interval", "2", "3", "--config", str(config_file)],
    )

    assert result.exit_code == run.EXIT_BAD_INPUT
    assert "Invalid shape" in result.stdout


@pytest.mark.parametrize("extra", [["--n", "63"], ["--eta", "often"], ["--beta", "-1"]])
def test_solve_rejects_bad_options(config_file: Path, extra: list[str]) -> None:
    result = runner.invoke(
        run.cli,
        ["solve", "--shape", DISK, "--interval", "2", "3", "--config", str(config_file), *extra],
    )

    assert result.exit_code == run.EXIT_BAD_INPUT


def test_solve_reports_no_convergence(monkeypatch, config_file: Path) -> None:
    def fake_solve(*_: object, **__: object) -> SolveReport:
        raise NoConvergenceError("budget exhausted", diagnostics={"window": (2.0, 3.0)})

    monkeypatch.setattr(run, "solve_interval", fake_solve)

    result = runner.invoke(
        run.cli, ["solve", "--shape", DISK, "--interval", "2", "3", "--config", str(config_file)]
    )

    assert result.exit_code == run.EXIT_NO_CONVERGENCE
    assert "No convergence" in result.stdout


def test_benchmark_maps_determinant_overflow_to_no_convergence(
    monkeypatch, config_file: Path
) -> None:
    def fake_compare(*_: object, **__: object) -> None:
        raise DeterminantOverflowError("determinant of 2^2000 is not representable")

    monkeypatch.setattr(run, "compare_methods", fake_compare)

    result = runner.invoke(
        run.cli,
        ["benchmark", "--shape", DISK, "--interval", "2", "3", "--config", str(config_file)],
    )

    assert result.exit_code == run.EXIT_NO_CONVERGENCE
    assert "No convergence" in result.stdout


def test_solve_exits_on_weyl_warning(monkeypatch, config_file: Path, tmp_path: Path) -> None:
    def fake_solve(boundary, a, b, options, **_: object) -> SolveReport:
        return SolveReport(
            domain={"type": "ellipse"},
            interval=(a, b),
            representation=options.representation,
            results=[EigResult(kappa=2.5, beta=0.0, method="boyd-det", n_nodes=64)],
            weyl=WeylAudit(expected=9.0, found=1, warning=True),
        )

    monkeypatch.setattr(run, "solve_interval", fake_solve)

    result = runner.invoke(
        run.cli,
        [
            "solve", "--shape", DISK, "--interval", "2", "3",
            "--style", "console", "--out", str(tmp_path / "weyl.json"),
            "--config", str(config_file),
        ],
    )

    assert result.exit_code == run.EXIT_WEYL_WARNING
    assert "Weyl audit mismatch" in result.stdout
    assert (tmp_path / "weyl.json").exists()


def test_sweep_writes_csv_and_plot(config_file: Path, tmp_path: Path) -> None:
    target = tmp_path / "sweep.csv"

    result = runner.invoke(
        run.cli,
        [
            "sweep", "--shape", DISK, "--interval", "2", "3", "--samples", "5",
            "--n", "32", "--plot", "--out", str(target), "--config", str(config_file),
        ],
    )

    assert result.exit_code == 0, result.stdout
    with target.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 5
    assert list(rows[0]) == ["kappa", "sigma_min_dlp", "sigma_min_cfie"]
    assert target.with_suffix(".png").exists()


def test_converge_writes_offset_columns(config_file: Path, tmp_path: Path) -> None:
    target = tmp_path / "converge.csv"

    result = runner.invoke(
        run.cli,
        [
            "converge", "--shape", DISK, "--kappa", "2.4", "--n-list", "16,32",
            "--offset", "0.1", "--out", str(target), "--config", str(config_file),
        ],
    )

    assert result.exit_code == 0, result.stdout
    header = target.read_text(encoding="utf-8").splitlines()[0]
    assert header == "N,abs_f,log10_abs_f,abs_f_offset_+0.1,root,root_change"


def test_converge_rejects_odd_node_counts(config_file: Path, tmp_path: Path) -> None:
    result = runner.invoke(
        run.cli,
        ["converge", "--shape", DISK, "--kappa", "2.4", "--n-list", "15,32", "--config", str(config_file)],
    )

    assert result.exit_code == run.EXIT_BAD_INPUT


def test_modes_writes_two_files_for_a_double_eigenfrequency(config_file: Path, tmp_path: Path) -> None:
    directory = tmp_path / "modes"

    result = runner.invoke(
        run.cli,
        [
            "modes", "--shape", DISK, "--kappa", repr(J01), "--kappa", repr(J11),
            "--kappa", repr(J11), "--grid", "21", "21", "--format", "csv", "--n", "64",
            "--out", str(directory), "--config", str(config_file),
        ],
    )

    assert result.exit_code == 0, result.stdout
    assert sorted(path.name for path in directory.iterdir()) == [
        "mode-001.csv",
        "mode-002.csv",
        "mode-003.csv",
    ]
    assert result.stdout.count(f"κ={J11:.12g}") == 2


def test_modes_rejects_repeating_a_simple_eigenfrequency(config_file: Path, tmp_path: Path) -> None:
    result = runner.invoke(
        run.cli,
        [
            "modes", "--shape", DISK, "--kappa", repr(J01), "--kappa", repr(J01),
            "--grid", "21", "21", "--n", "64", "--out", str(tmp_path / "modes"),
            "--config", str(config_file),
        ],
    )

    assert result.exit_code == run.EXIT_NO_CONVERGENCE
    assert "multiplicity 2" in result.stdout


def test_modes_rejects_non_eigenfrequency(config_file: Path, tmp_path: Path) -> None:
    result = runner.invoke(
        run.cli,
        [
            "modes", "--shape", DISK, "--kappa", "3.0", "--grid", "11", "11",
            "--n", "64", "--out", str(tmp_path / "modes"), "--config", str(config_file),
        ],
    )

    assert result.exit_code == run.EXIT_NO_CONVERGENCE
    assert "Mode failed" in result.stdout


def test_modes_needs_a_wavenumber(config_file: Path) -> None:
    result = runner.invoke(run.cli, ["modes", "--shape", DISK, "--config", str(config_file)])

    assert result.exit_code == run.EXIT_BAD_INPUT


def test_main_maps_usage_errors_to_bad_input(capsys) -> None:
    assert run.main(["solve", "--interval", "2", "3"]) == run.EXIT_BAD_INPUT
    assert run.main(["shapes", "--json"]) == run.EXIT_OK
    assert '"crescent"' in capsys.readouterr().out


@pytest.mark.parametrize(
    ("raw", "expected"), [("kappa", None), ("K", None), ("dlp", 0.0), ("0", 0.0), ("2.5", 2.5)]
)
def test_parse_eta(raw: str, expected) -> None:
    assert run._parse_eta(raw) == expected
