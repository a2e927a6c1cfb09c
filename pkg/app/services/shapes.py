"""Shape specifications: parsing, normalisation and the built-in catalogue."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Tuple

from ..numerics.geometry import (
    Boundary,
    Curve,
    GeometryError,
    make_boundary,
    make_crescent,
    make_ellipse,
    make_radial_curve,
)


LOGGER = logging.getLogger(__name__)

ShapeTypeName = Literal["radial", "ellipse", "crescent", "annulus"]
SHAPE_TYPES: Tuple[ShapeTypeName, ...] = ("radial", "ellipse", "crescent", "annulus")


class ShapeSpecError(ValueError):
    """Raised for malformed or invalid shape specifications."""


@dataclass(frozen=True)
class ShapeTemplate:
    name: ShapeTypeName
    description: str
    defaults: Mapping[str, Any]
    resonant: bool = False


DEFAULT_RADIAL: Dict[str, Any] = {"a0": 1.0, "cos": {"3": 0.2}, "sin": {"2": 0.3}}
DEFAULT_HOLE: Dict[str, Any] = {"a0": 0.5, "cos": {"3": 0.1}, "sin": {"2": 0.15}}

SHAPE_CATALOG: Dict[ShapeTypeName, ShapeTemplate] = {
    "radial": ShapeTemplate(
        name="radial",
        description="Star-shaped curve r(θ) = a0 + Σ ac_j cos jθ + Σ as_j sin jθ.",
        defaults={"type": "radial", **DEFAULT_RADIAL},
    ),
    "ellipse": ShapeTemplate(
        name="ellipse",
        description="Ellipse (a cos t, b sin t); a = b gives a disk.",
        defaults={"type": "ellipse", "a": 1.0, "b": 1.0},
    ),
    "crescent": ShapeTemplate(
        name="crescent",
        description="Non-convex crescent with a near-resonant exterior cavity.",
        defaults={"type": "crescent"},
        resonant=True,
    ),
    "annulus": ShapeTemplate(
        name="annulus",
        description="Outer curve with one hole; each part is a radial, ellipse or crescent object.",
        defaults={
            "type": "annulus",
            "outer": {"type": "radial", **DEFAULT_RADIAL},
            "inner": {"type": "radial", **DEFAULT_HOLE},
        },
    ),
}


def _as_float(value: Any, label: str) -> float:
    try:
        result = float(value)
    except (TypeError, ValueError) as error:
        raise ShapeSpecError(f"'{label}' must be a number (got {value!r}).") from error
    if not math.isfinite(result):
        raise ShapeSpecError(f"'{label}' must be finite.")
    return result


def _normalize_harmonics(raw: Any, label: str) -> Dict[str, float]:
    if raw is None:
        return {}
    if isinstance(raw, Mapping):
        items = list(raw.items())
    elif isinstance(raw, (list, tuple)):
        items = []
        for entry in raw:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ShapeSpecError(f"'{label}' entries must be [order, amplitude] pairs.")
            items.append((entry[0], entry[1]))
    else:
        raise ShapeSpecError(f"'{label}' must be a mapping of order to amplitude.")
    normalized: Dict[str, float] = {}
    for order, amplitude in items:
        try:
            order_value = int(order)
        except (TypeError, ValueError) as error:
            raise ShapeSpecError(f"'{label}' order {order!r} is not an integer.") from error
        if order_value < 1:
            raise ShapeSpecError(f"'{label}' orders must be positive (got {order_value}).")
        normalized[str(order_value)] = _as_float(amplitude, f"{label}[{order_value}]")
    return dict(sorted(normalized.items(), key=lambda item: int(item[0])))


def _normalize_radial(raw: Mapping[str, Any], defaults: Mapping[str, Any]) -> Dict[str, Any]:
    has_terms = any(key in raw for key in ("a0", "cos", "sin"))
    source = raw if has_terms else {**defaults, **raw}
    return {
        "type": "radial",
        "a0": _as_float(source.get("a0", 1.0), "a0"),
        "cos": _normalize_harmonics(source.get("cos"), "cos"),
        "sin": _normalize_harmonics(source.get("sin"), "sin"),
    }


def _normalize_simple(
    shape_type: str, raw: Mapping[str, Any], radial_defaults: Mapping[str, Any]
) -> Dict[str, Any]:
    if shape_type == "radial":
        return _normalize_radial(raw, radial_defaults)
    if shape_type == "ellipse":
        return {
            "type": "ellipse",
            "a": _as_float(raw.get("a", 1.0), "a"),
            "b": _as_float(raw.get("b", 1.0), "b"),
        }
    return {"type": "crescent"}


def _normalize_component(
    raw: Any, label: str, radial_defaults: Mapping[str, Any]
) -> Dict[str, Any]:
    if not isinstance(raw, Mapping):
        raise ShapeSpecError(f"Annulus '{label}' must be a shape object.")
    shape_type = str(raw.get("type", "radial")).strip().lower()
    if shape_type == "annulus" or shape_type not in SHAPE_CATALOG:
        raise ShapeSpecError(
            f"Annulus '{label}' must be a radial, ellipse or crescent object "
            f"(got {raw.get('type')!r})."
        )
    return _normalize_simple(shape_type, raw, radial_defaults)


def normalize_shape_spec(raw: Any) -> Dict[str, Any]:
    """Return the canonical form of a shape specification, defaults filled in.

    An annulus takes any other shape type for ``outer`` and ``inner``; a
    component without ``type`` is radial.
    """

    if not isinstance(raw, Mapping):
        raise ShapeSpecError("A shape specification must be a JSON object.")
    shape_type = str(raw.get("type", "")).strip().lower()
    if shape_type not in SHAPE_CATALOG:
        raise ShapeSpecError(
            f"Unknown shape type {raw.get('type')!r}; expected one of {', '.join(SHAPE_TYPES)}."
        )
    if shape_type != "annulus":
        return _normalize_simple(shape_type, raw, DEFAULT_RADIAL)
    return {
        "type": "annulus",
        "outer": _normalize_component(raw.get("outer", {}), "outer", DEFAULT_RADIAL),
        "inner": _normalize_component(raw.get("inner", {}), "inner", DEFAULT_HOLE),
    }


def _curve(spec: Mapping[str, Any], name: str) -> Curve:
    if spec["type"] == "ellipse":
        return make_ellipse(spec["a"], spec["b"], name=name)
    if spec["type"] == "crescent":
        return make_crescent(name=name)
    return make_radial_curve(
        spec["a0"],
        {int(order): value for order, value in spec["cos"].items()},
        {int(order): value for order, value in spec["sin"].items()},
        name=name,
    )


def build_boundary(raw: Any) -> Boundary:
    """Build a :class:`Boundary` from a (possibly partial) shape specification."""

    spec = normalize_shape_spec(raw)
    label = shape_label(spec)
    try:
        if spec["type"] != "annulus":
            return make_boundary(_curve(spec, spec["type"]), label=label)
        return make_boundary(
            _curve(spec["outer"], "outer"),
            [_curve(spec["inner"], "inner")],
            label=label,
        )
    except GeometryError as error:
        raise ShapeSpecError(str(error)) from error


def load_shape_spec(source: str | Path | Mapping[str, Any]) -> Dict[str, Any]:
    """Read a shape from inline JSON, a JSON file path or a mapping."""

    if isinstance(source, Mapping):
        return normalize_shape_spec(source)
    text = str(source).strip()
    if not text.startswith("{"):
        path = Path(text).expanduser()
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as error:
            raise ShapeSpecError(f"Cannot read shape file '{path}': {error}") from error
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as error:
        raise ShapeSpecError(f"Shape specification is not valid JSON: {error}") from error
    return normalize_shape_spec(raw)


def is_resonant(spec: Mapping[str, Any]) -> bool:
    shape_type = str(spec.get("type", "")).lower()
    if shape_type == "annulus":
        return any(
            is_resonant(spec.get(part) or {"type": "radial"}) for part in ("outer", "inner")
        )
    template = SHAPE_CATALOG.get(shape_type)
    return bool(template and template.resonant)


def shape_label(spec: Mapping[str, Any]) -> str:
    """Short human-readable label, also used in file names."""

    shape_type = spec.get("type", "shape")
    if shape_type == "ellipse":
        if spec["a"] == spec["b"]:
            return f"disk-r{spec['a']:g}"
        return f"ellipse-a{spec['a']:g}-b{spec['b']:g}"
    return str(shape_type)


def catalog_entries() -> List[Dict[str, Any]]:
    """Machine-readable listing used by the ``shapes`` command."""

    return [
        {
            "type": template.name,
            "description": template.description,
            "resonant": template.resonant,
            "defaults": normalize_shape_spec(template.defaults),
        }
        for template in SHAPE_CATALOG.values()
    ]


__all__ = [
    "SHAPE_CATALOG",
    "SHAPE_TYPES",
    "ShapeSpecError",
    "ShapeTemplate",
    "build_boundary",
    "catalog_entries",
    "is_resonant",
    "load_shape_spec",
    "normalize_shape_spec",
    "shape_label",
]
