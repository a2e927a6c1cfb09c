"""Helpers for consistent artifact naming."""

from __future__ import annotations

import re
from typing import Optional, Sequence

__all__ = [
    "slugify",
    "build_asset_stem",
    "build_result_stem",
]


def slugify(value: str) -> str:
    """Return a filesystem-friendly representation of *value*."""

    value = value.strip().lower()
    value = re.sub(r"[^a-z0-9.]+", "-", value)
    value = value.replace(".", "p")
    value = re.sub(r"-+", "-", value).strip("-")
    return value or "item"


def build_asset_stem(*parts: str) -> str:
    """Return a slugified stem joined from the provided *parts*."""

    cleaned = [slugify(part) for part in parts if part]
    return "-".join(cleaned) if cleaned else "item"


def build_result_stem(kind: str, shape_label: str, interval: Optional[Sequence[float]] = None) -> str:
    """Stem such as ``solve-disk-r1-2-to-6`` for a command's output files."""

    parts = [kind, shape_label]
    if interval is not None:
        lower, upper = interval
        parts.append(f"{lower:g}-to-{upper:g}")
    return build_asset_stem(*parts)

