"""Writers for solver reports, tables, mode grids and raster renderings."""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from PIL import Image

from .events import emit_file_event
from .modes import ModeGrid


LOGGER = logging.getLogger(__name__)

GRID_MAGIC = b"DRUMGRID"
GRID_HEADER_DTYPE = np.dtype([("bbox", "<f8", (4,)), ("nx", "<i4"), ("ny", "<i4"), ("kappa", "<f8")])
MASKED_COLOUR = (200, 200, 200)
PLOT_SIZE_INCHES = (7.2, 4.2)
PLOT_DPI = 100

ModeFormat = Literal["csv", "grid", "png"]


def _prepare(path: Path) -> Path:
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(payload: Mapping[str, Any], path: Path) -> Path:
    """Write ``payload`` as indented JSON with sorted keys."""

    target = _prepare(path)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    emit_file_event("JSON written", payload={"path": target})
    return target


def write_csv(
    rows: Iterable[Mapping[str, Any]],
    path: Path,
    *,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    """Write dictionaries as CSV; ``columns`` fixes the header order."""

    materialised = [dict(row) for row in rows]
    if columns is None:
        columns = list(materialised[0].keys()) if materialised else []
    target = _prepare(path)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in materialised:
            writer.writerow({key: _csv_value(row.get(key)) for key in columns})
    emit_file_event("CSV written", payload={"path": target, "rows": len(materialised)})
    return target


def _csv_value(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


# ---------------------------------------------------------------------------
# Mode grids
# ---------------------------------------------------------------------------
def mode_rows(mode: ModeGrid) -> List[Dict[str, float]]:
    """``(x, y, value)`` rows for every accepted grid point."""

    grid_x, grid_y = np.meshgrid(mode.xs, mode.ys)
    return [
        {"x": float(x), "y": float(y), "value": float(value)}
        for x, y, value in zip(grid_x[mode.mask], grid_y[mode.mask], mode.values[mode.mask])
    ]


def write_grid_binary(mode: ModeGrid, path: Path) -> Path:
    """Magic bytes, a fixed header (bbox, nx, ny, κ), then row-major float64 values."""

    header = np.zeros((), dtype=GRID_HEADER_DTYPE)
    header["bbox"] = mode.bbox
    header["nx"] = mode.nx
    header["ny"] = mode.ny
    header["kappa"] = mode.kappa
    target = _prepare(path)
    with target.open("wb") as handle:
        handle.write(GRID_MAGIC)
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(mode.values, dtype="<f8").tobytes())
    emit_file_event("Grid written", payload={"path": target, "nx": mode.nx, "ny": mode.ny})
    return target


def read_grid_binary(path: Path) -> Tuple[Dict[str, Any], np.ndarray]:
    data = Path(path).read_bytes()
    if not data.startswith(GRID_MAGIC):
        raise ValueError(f"'{path}' is not a mode grid file.")
    offset = len(GRID_MAGIC)
    header = np.frombuffer(data, dtype=GRID_HEADER_DTYPE, count=1, offset=offset)[0]
    offset += GRID_HEADER_DTYPE.itemsize
    nx, ny = int(header["nx"]), int(header["ny"])
    values = np.frombuffer(data, dtype="<f8", count=nx * ny, offset=offset).reshape(ny, nx)
    meta = {
        "bbox": tuple(float(v) for v in header["bbox"]),
        "nx": nx,
        "ny": ny,
        "kappa": float(header["kappa"]),
    }
    return meta, values.copy()


def render_mode(mode: ModeGrid, *, scale: int = 1) -> Image.Image:
    """Blue-white-red rendering with masked cells in grey and ``y`` pointing up."""

    values = mode.values
    peak = float(np.max(np.abs(values[mode.mask]))) if mode.accepted else 0.0
    normalised = values / peak if peak > 0.0 else np.zeros_like(values)
    positive = np.clip(normalised, 0.0, 1.0)
    negative = np.clip(-normalised, 0.0, 1.0)
    rgb = np.empty(values.shape + (3,), dtype=float)
    rgb[..., 0] = 255.0 * (1.0 - negative)
    rgb[..., 1] = 255.0 * (1.0 - positive - negative)
    rgb[..., 2] = 255.0 * (1.0 - positive)
    rgb[~mode.mask] = MASKED_COLOUR
    image = Image.fromarray(np.flipud(np.rint(rgb).astype(np.uint8)))
    if scale > 1:
        image = image.resize((mode.nx * scale, mode.ny * scale), Image.Resampling.NEAREST)
    return image


def write_mode_grid(mode: ModeGrid, path: Path, fmt: ModeFormat = "grid") -> Path:
    """Write one mode as CSV rows, a binary grid or a PNG rendering."""

    if fmt == "csv":
        return write_csv(mode_rows(mode), path, columns=("x", "y", "value"))
    if fmt == "grid":
        return write_grid_binary(mode, path)
    if fmt == "png":
        target = _prepare(path)
        render_mode(mode).save(target, format="PNG")
        emit_file_event("PNG written", payload={"path": target})
        return target
    raise ValueError(f"Unknown mode format '{fmt}'.")


def montage(modes: Sequence[ModeGrid], path: Path, *, columns: int = 10, tile: int = 96) -> Path:
    """Tile renderings of several modes into one PNG, row by row."""

    if not modes:
        raise ValueError("Montage needs at least one mode.")
    columns = max(1, min(columns, len(modes)))
    rows = int(math.ceil(len(modes) / columns))
    sheet = Image.new("RGB", (columns * tile, rows * tile), color=(255, 255, 255))
    for index, mode in enumerate(modes):
        thumbnail = render_mode(mode)
        thumbnail.thumbnail((tile, tile), Image.Resampling.LANCZOS)
        row, column = divmod(index, columns)
        left = column * tile + (tile - thumbnail.width) // 2
        top = row * tile + (tile - thumbnail.height) // 2
        sheet.paste(thumbnail, (left, top))
    target = _prepare(path)
    sheet.save(target, format="PNG")
    emit_file_event("Montage written", payload={"path": target, "modes": len(modes)})
    return target


# ---------------------------------------------------------------------------
# Sweep plots
# ---------------------------------------------------------------------------
def render_sweep_plot(
    kappas: Sequence[float], series: Mapping[str, Sequence[float]]
) -> Figure:
    """``σ_min`` against κ on a log axis, one line per representation."""

    figure = Figure(figsize=PLOT_SIZE_INCHES, dpi=PLOT_DPI)
    FigureCanvasAgg(figure)
    axes = figure.add_subplot(1, 1, 1)
    for name, values in series.items():
        axes.semilogy(kappas, np.maximum(np.asarray(values, dtype=float), 1e-300), label=name)
    axes.set_xlabel("κ")
    axes.set_ylabel("σ_min")
    axes.grid(True, which="both", alpha=0.3)
    if series:
        axes.legend(loc="best")
    figure.tight_layout()
    return figure


def write_sweep_plot(
    kappas: Sequence[float], series: Mapping[str, Sequence[float]], path: Path
) -> Path:
    target = _prepare(path)
    render_sweep_plot(kappas, series).savefig(target, format="png", dpi=PLOT_DPI)
    emit_file_event("PNG written", payload={"path": target})
    return target


__all__ = [
    "GRID_MAGIC",
    "mode_rows",
    "montage",
    "read_grid_binary",
    "render_mode",
    "render_sweep_plot",
    "write_csv",
    "write_grid_binary",
    "write_json",
    "write_mode_grid",
    "write_sweep_plot",
]
