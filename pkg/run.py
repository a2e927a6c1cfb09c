"""Entry-point for the drum eigenvalue solver."""

from __future__ import annotations

import json
import logging
import sys
from collections import Counter
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional, Tuple, TypeVar

import click
import typer

PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from app.bootstrap import BootstrapError, initialize_app
from app.config import DEFAULT_N_RULE, DEFAULT_N_RULE_RESONANT, AppConfig, SolverDefaults
from app.logging_utils import DEFAULT_LOG_FORMAT, configure_logging, get_log_file_path, parse_log_level
from app.numerics.linalg import DeterminantOverflowError
from app.numerics.rootfind import BoydOptions, NoConvergenceError
from app.services.artifacts import montage, write_csv, write_json, write_mode_grid, write_sweep_plot
from app.services.modes import EmptyGridError, NotAnEigenfrequencyError, compute_modes
from app.services.naming import build_result_stem
from app.services.progress import build_window_progress_message
from app.services.shapes import (
    ShapeSpecError,
    build_boundary,
    catalog_entries,
    is_resonant,
    load_shape_spec,
    shape_label,
)
from app.services.solver import NRule, SolveOptions, SolveReport, solve_interval, sweep_sigma_min
from app.services.studies import (
    compare_methods,
    convergence_columns,
    determinant_convergence,
    ellipse_crossing,
)
from app.ui.console import ConsoleUI
from app.ui.modern import ModernUI


LOGGER = logging.getLogger("drum_eigen.cli")

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NO_CONVERGENCE = 2
EXIT_WEYL_WARNING = 3

T = TypeVar("T")

DEFAULT_CROSSING_AXES = "0.50,0.52,0.54,0.56,0.58,0.60"
DEFAULT_CONVERGE_NODES = "80,100,120,140,160,180,200"

cli = typer.Typer(add_completion=False, help="Dirichlet eigenfrequencies of planar drums")

_INSTALLED_HANDLERS: List[logging.Handler] = []


def _prepare_logging(output_root: Path, level: int) -> None:
    root = logging.getLogger()
    for handler in _INSTALLED_HANDLERS:
        root.removeHandler(handler)
        handler.close()
    _INSTALLED_HANDLERS.clear()

    log_file = get_log_file_path(output_root)
    formatter = logging.Formatter(DEFAULT_LOG_FORMAT)
    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setFormatter(formatter)
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    stream_handler.setLevel(max(level, logging.WARNING))
    _INSTALLED_HANDLERS.extend([file_handler, stream_handler])
    configure_logging(level, handlers=_INSTALLED_HANDLERS)


class UIStyle(str, Enum):
    MODERN = "modern"
    CONSOLE = "console"


class ModeFormat(str, Enum):
    CSV = "csv"
    GRID = "grid"
    PNG = "png"


style_option = typer.Option(
    UIStyle.MODERN,
    "--style",
    "-s",
    help="Select the summary presentation style.",
    show_default=True,
)
config_option = typer.Option(None, "--config", help="Configuration file (defaults to config/default.json).")
log_level_option = typer.Option("info", "--log-level", help="Log level for the log file.")
shape_option = typer.Option(..., "--shape", help="Shape as inline JSON or a path to a JSON file.")
eta_option = typer.Option("kappa", "--eta", help="Coupling parameter: 'kappa', '0' or a number.")
out_option = typer.Option(None, "--out", help="Output path (defaults under the output root).")


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------
def _bootstrap(config_path: Optional[Path], log_level: str) -> AppConfig:
    try:
        config = initialize_app(config_path)
    except (BootstrapError, OSError, json.JSONDecodeError) as error:
        typer.echo(f"Initialisation failed: {error}")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error
    _prepare_logging(config.output_root, parse_log_level(log_level))
    return config


def _load_shape(shape: str):
    try:
        spec = load_shape_spec(shape)
        return spec, build_boundary(spec)
    except ShapeSpecError as error:
        typer.echo(f"Invalid shape: {error}")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error


def _parse_eta(raw: str) -> Optional[float]:
    text = raw.strip().lower()
    if text in {"kappa", "k", "cfie"}:
        return None
    if text == "dlp":
        return 0.0
    try:
        return float(text)
    except ValueError as error:
        typer.echo(f"Invalid --eta: expected 'kappa', '0' or a number (got {raw!r}).")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error


def _parse_float_list(raw: str, hint: str) -> List[float]:
    try:
        return [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as error:
        typer.echo(f"Invalid {hint}: expected comma-separated numbers (got {raw!r}).")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error


def _build_options(
    config: AppConfig,
    spec,
    *,
    eta: str,
    n_rule: Optional[str] = None,
    n_nodes: Optional[int] = None,
    beta: Optional[float] = None,
    close_root_s: Optional[float] = None,
    threads: Optional[int] = None,
    estimate_errors: bool = True,
) -> SolveOptions:
    overrides = {"eta": _parse_eta(eta), "estimate_errors": estimate_errors}
    try:
        if n_rule is not None:
            overrides["n_rule"] = NRule.parse(n_rule)
        if n_nodes is not None:
            if n_nodes < 4 or n_nodes % 2:
                raise ValueError(f"--n must be even and at least 4 (got {n_nodes}).")
            overrides["n_nodes"] = n_nodes
        if beta is not None:
            overrides["beta_max"] = beta
        if close_root_s is not None:
            overrides["close_root_s"] = close_root_s
        if threads is not None:
            overrides["threads"] = max(1, threads)
        return SolveOptions.from_defaults(config.solver, resonant=is_resonant(spec), **overrides)
    except ValueError as error:
        typer.echo(f"Invalid solver option: {error}")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error


def _progress_echo(message: str, completed: int, total: int) -> None:
    typer.echo(build_window_progress_message(message, completed, total))


def _render_report(report: SolveReport, style: UIStyle) -> None:
    if style is UIStyle.MODERN:
        ModernUI().show_report(report)
    else:
        ConsoleUI(echo=typer.echo).show_report(report)


def _default_path(config: AppConfig, stem: str, extension: str, out: Optional[Path]) -> Path:
    if out is not None:
        return out.expanduser()
    return config.output_root / f"{stem}{extension}"


def _run_solver(call: Callable[[], T]) -> T:
    try:
        return call()
    except NoConvergenceError as error:
        typer.echo(f"No convergence: {error} {error.diagnostics}")
        raise typer.Exit(code=EXIT_NO_CONVERGENCE) from error
    except DeterminantOverflowError as error:
        typer.echo(f"No convergence: {error}")
        raise typer.Exit(code=EXIT_NO_CONVERGENCE) from error
    except ValueError as error:
        typer.echo(f"Invalid input: {error}")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
@cli.command()
def solve(
    shape: str = shape_option,
    interval: Tuple[float, float] = typer.Option(..., "--interval", help="Wavenumber interval a b."),
    eta: str = eta_option,
    n_rule: Optional[str] = typer.Option(None, "--n-rule", help="Node rule 'max(A,B+C*kappa)'."),
    n_nodes: Optional[int] = typer.Option(None, "--n", help="Fixed node count (overrides the rule)."),
    beta: Optional[float] = typer.Option(None, "--beta", help="Largest accepted |Im κ̃|."),
    close_root_s: Optional[float] = typer.Option(None, "--close-root-s", help="Close-root threshold."),
    threads: Optional[int] = typer.Option(None, "--threads", help="Determinant evaluations in parallel."),
    no_errors: bool = typer.Option(False, "--no-errors", help="Skip the error estimates."),
    out: Optional[Path] = out_option,
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
    style: UIStyle = style_option,
) -> None:
    """Find every eigenfrequency in an interval and write the JSON report."""

    config = _bootstrap(config_path, log_level)
    spec, boundary = _load_shape(shape)
    options = _build_options(
        config,
        spec,
        eta=eta,
        n_rule=n_rule,
        n_nodes=n_nodes,
        beta=beta,
        close_root_s=close_root_s,
        threads=threads,
        estimate_errors=not no_errors,
    )
    a, b = interval
    report = _run_solver(
        lambda: solve_interval(
            boundary, a, b, options, domain={**spec, "label": shape_label(spec)}, progress=_progress_echo
        )
    )
    target = _default_path(config, build_result_stem("solve", shape_label(spec), interval), ".json", out)
    write_json(report.to_dict(), target)
    _render_report(report, style)
    typer.echo(f"Report saved to: {target}")
    if report.weyl is not None and report.weyl.warning:
        typer.echo("Weyl audit mismatch: eigenfrequencies may be missing.")
        raise typer.Exit(code=EXIT_WEYL_WARNING)


@cli.command()
def sweep(
    shape: str = shape_option,
    interval: Tuple[float, float] = typer.Option(..., "--interval", help="Wavenumber interval a b."),
    samples: int = typer.Option(200, "--samples", help="Number of equispaced wavenumbers."),
    n_nodes: Optional[int] = typer.Option(None, "--n", help="Fixed node count."),
    plot: bool = typer.Option(False, "--plot", help="Also write a PNG plot."),
    out: Optional[Path] = out_option,
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Tabulate σ_min of the double-layer and combined matrices."""

    config = _bootstrap(config_path, log_level)
    spec, boundary = _load_shape(shape)
    a, b = interval
    columns = {}
    for name, eta in (("dlp", "0"), ("cfie", "kappa")):
        options = _build_options(config, spec, eta=eta, n_nodes=n_nodes)
        try:
            columns[name] = sweep_sigma_min(boundary, a, b, samples, options)
        except ValueError as error:
            typer.echo(f"Invalid input: {error}")
            raise typer.Exit(code=EXIT_BAD_INPUT) from error
    rows = [
        {"kappa": kappa, "sigma_min_dlp": dlp, "sigma_min_cfie": cfie}
        for (kappa, dlp), (_, cfie) in zip(columns["dlp"], columns["cfie"])
    ]
    target = _default_path(config, build_result_stem("sweep", shape_label(spec), interval), ".csv", out)
    write_csv(rows, target, columns=("kappa", "sigma_min_dlp", "sigma_min_cfie"))
    typer.echo(f"Sweep saved to: {target}")
    if plot:
        image = write_sweep_plot(
            [row["kappa"] for row in rows],
            {
                "dlp": [row["sigma_min_dlp"] for row in rows],
                "cfie": [row["sigma_min_cfie"] for row in rows],
            },
            target.with_suffix(".png"),
        )
        typer.echo(f"Plot saved to: {image}")


@cli.command()
def converge(
    shape: str = shape_option,
    kappa: float = typer.Option(..., "--kappa", help="Wavenumber at which |f_N| is tabulated."),
    n_list: str = typer.Option(DEFAULT_CONVERGE_NODES, "--n-list", help="Ascending even node counts."),
    bracket: Optional[Tuple[float, float]] = typer.Option(None, "--bracket", help="Interval for the root per N."),
    offset: Optional[List[float]] = typer.Option(None, "--offset", help="Extra wavenumber offsets (repeatable)."),
    eta: str = eta_option,
    out: Optional[Path] = out_option,
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Tabulate determinant magnitudes and roots against the node count."""

    config = _bootstrap(config_path, log_level)
    spec, boundary = _load_shape(shape)
    counts = [int(value) for value in _parse_float_list(n_list, "--n-list")]
    offsets = list(offset or [])
    try:
        rows = determinant_convergence(
            boundary, kappa, counts, eta=_parse_eta(eta), bracket=bracket, offsets=offsets
        )
    except ValueError as error:
        typer.echo(f"Invalid input: {error}")
        raise typer.Exit(code=EXIT_BAD_INPUT) from error
    target = _default_path(config, build_result_stem("converge", shape_label(spec)), ".csv", out)
    write_csv(rows, target, columns=convergence_columns(offsets))
    typer.echo(f"Convergence table saved to: {target}")


@cli.command()
def modes(
    shape: str = shape_option,
    kappa: Optional[List[float]] = typer.Option(
        None, "--kappa", help="Eigenfrequency; repeat a value for each extra multiplicity."
    ),
    interval: Optional[Tuple[float, float]] = typer.Option(None, "--interval", help="Solve first on a b."),
    grid: Tuple[int, int] = typer.Option((200, 200), "--grid", help="Grid points nx ny."),
    fmt: ModeFormat = typer.Option(ModeFormat.GRID, "--format", help="Mode file format."),
    with_montage: bool = typer.Option(False, "--montage", help="Also tile all modes into one PNG."),
    n_nodes: Optional[int] = typer.Option(None, "--n", help="Fixed node count."),
    eta: str = eta_option,
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Reconstruct eigenmodes on a grid and write one file per mode."""

    config = _bootstrap(config_path, log_level)
    spec, boundary = _load_shape(shape)
    options = _build_options(config, spec, eta=eta, n_nodes=n_nodes, estimate_errors=False)
    kappas = list(kappa or [])
    if interval is not None:
        a, b = interval
        report = _run_solver(lambda: solve_interval(boundary, a, b, options))
        for result in report.results:
            if not result.spurious:
                kappas.extend([result.kappa] * result.multiplicity)
    if not kappas:
        typer.echo("Provide --kappa or an --interval containing eigenfrequencies.")
        raise typer.Exit(code=EXIT_BAD_INPUT)

    directory = (out or config.modes_root / build_result_stem("modes", shape_label(spec))).expanduser()
    extension = {"csv": ".csv", "grid": ".grid", "png": ".png"}[fmt.value]
    computed = []
    # A value listed twice is a double eigenfrequency with two modes.
    for value, multiplicity in Counter(kappas).items():
        try:
            grids = compute_modes(
                boundary,
                value,
                tuple(grid),
                multiplicity=multiplicity,
                n_nodes=options.nodes_for(value),
                svd_tol=options.svd_tol,
            )
        except NotAnEigenfrequencyError as error:
            typer.echo(f"Mode failed: {error}")
            raise typer.Exit(code=EXIT_NO_CONVERGENCE) from error
        except EmptyGridError as error:
            typer.echo(f"Mode failed: {error}")
            raise typer.Exit(code=EXIT_BAD_INPUT) from error
        for mode in grids:
            index = len(computed) + 1
            path = write_mode_grid(mode, directory / f"mode-{index:03d}{extension}", fmt.value)
            typer.echo(f"Mode κ={value:.12g} saved to: {path}")
            computed.append(mode)
    if with_montage:
        sheet = montage(computed, directory / "montage.png")
        typer.echo(f"Montage saved to: {sheet}")


@cli.command()
def shapes(
    as_json: bool = typer.Option(False, "--json", help="Print the catalogue as JSON."),
    style: UIStyle = style_option,
) -> None:
    """List the built-in shape types and their default parameters."""

    if as_json:
        typer.echo(json.dumps(catalog_entries(), indent=2))
        return
    if style is UIStyle.MODERN:
        ModernUI().show_catalog()
    else:
        ConsoleUI(echo=typer.echo).show_catalog()


@cli.command()
def benchmark(
    shape: str = shape_option,
    interval: Tuple[float, float] = typer.Option(..., "--interval", help="Wavenumber interval a b."),
    grid_step: Optional[float] = typer.Option(None, "--grid-step", help="κ step of the SVD scan."),
    eta: str = eta_option,
    out: Optional[Path] = out_option,
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Compare the determinant pipeline with a singular-value scan."""

    config = _bootstrap(config_path, log_level)
    spec, boundary = _load_shape(shape)
    options = _build_options(config, spec, eta=eta)
    a, b = interval
    comparison = _run_solver(
        lambda: compare_methods(boundary, a, b, options, grid_step=grid_step)
    )
    target = _default_path(config, build_result_stem("benchmark", shape_label(spec), interval), ".json", out)
    write_json({"domain": spec, "interval": [a, b], **comparison.to_dict()}, target)
    typer.echo(
        f"Factorisations {comparison.determinant_factorizations} vs {comparison.svd_factorizations} "
        f"(ratio {comparison.factorization_ratio:.2f}); time ratio {comparison.time_ratio:.2f}"
    )
    typer.echo(f"Benchmark saved to: {target}")


@cli.command()
def crossing(
    semi_axes: str = typer.Option(DEFAULT_CROSSING_AXES, "--b", help="Comma-separated semi-axes b."),
    interval: Tuple[float, float] = typer.Option((7.0, 9.0), "--interval", help="Wavenumber interval."),
    n_nodes: Optional[int] = typer.Option(None, "--n", help="Fixed node count."),
    out: Optional[Path] = out_option,
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Near crossings of ellipse eigenfrequencies by determinant and by SVD."""

    config = _bootstrap(config_path, log_level)
    axes = _parse_float_list(semi_axes, "--b")
    options = _build_options(config, {"type": "ellipse"}, eta="0", n_nodes=n_nodes, estimate_errors=False)
    rows = _run_solver(lambda: ellipse_crossing(axes, interval=tuple(interval), options=options))
    target = _default_path(config, build_result_stem("crossing", "ellipse", interval), ".csv", out)
    write_csv(rows, target, columns=("b", "method", "kappa", "beta"))
    typer.echo(f"Crossing table saved to: {target}")


def selftest_checks(config: AppConfig) -> List[Tuple[str, object, object]]:
    """``(name, in-code default, configured value)`` for every numeric default."""

    defaults = SolverDefaults()
    options = SolveOptions()
    boyd = BoydOptions()
    configured = config.solver
    return [
        ("n_rule", NRule(), NRule.parse(configured.n_rule)),
        ("n_rule_resonant", NRule(350, 100.0, 7.0), NRule.parse(configured.n_rule_resonant)),
        ("n_rule text", NRule.parse(DEFAULT_N_RULE), NRule.parse(defaults.n_rule)),
        ("n_rule_resonant text", NRule.parse(DEFAULT_N_RULE_RESONANT), NRule.parse(defaults.n_rule_resonant)),
        ("beta", boyd.beta_max, configured.beta),
        ("beta_resonant", defaults.beta_resonant, configured.beta_resonant),
        ("m_initial", boyd.m_initial, configured.m_initial),
        ("m_max", boyd.m_max, configured.m_max),
        ("coeff_decay_tol", boyd.coeff_decay_tol, configured.coeff_decay_tol),
        ("circle_tol", boyd.circle_tol, configured.circle_tol),
        ("close_root_s", options.close_root_s, configured.close_root_s),
        ("svd_tol", options.svd_tol, configured.svd_tol),
        ("window_min_width", options.window_min_width, configured.window_min_width),
        ("window_target_roots", options.window_target_roots, configured.window_target_roots),
        ("error_grid", options.error_grid, configured.error_grid),
        ("mode grid", (200, 200), tuple(config.mode_grid)),
    ]


@cli.command()
def selftest(
    config_path: Optional[Path] = config_option,
    log_level: str = log_level_option,
) -> None:
    """Check that the numeric defaults in code agree with the configuration."""

    config = _bootstrap(config_path, log_level)
    failures = 0
    for name, expected, actual in selftest_checks(config):
        status = "ok" if expected == actual else "MISMATCH"
        if status != "ok":
            failures += 1
        typer.echo(f"{status:8s} {name}: default={expected} configured={actual}")
    if failures:
        typer.echo(f"{failures} default(s) differ from the configuration.")
        raise typer.Exit(code=EXIT_BAD_INPUT)
    typer.echo("All defaults agree.")


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map usage errors to the bad-input exit code."""

    command = typer.main.get_command(cli)
    try:
        result = command.main(args=argv, prog_name="run.py", standalone_mode=False)
    except click.ClickException as error:
        error.show()
        return EXIT_BAD_INPUT
    except click.Abort:
        return EXIT_BAD_INPUT
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
