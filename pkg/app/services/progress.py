"""Utilities for reporting deterministic progress percentages."""

from __future__ import annotations

from typing import Optional


def format_progress_message(
    message: str,
    completed_steps: Optional[float],
    total_steps: Optional[float],
) -> str:
    """Append a percentage indicator to ``message`` when possible.

    ``completed_steps`` counts finished windows (or study stages) and
    ``total_steps`` their total. When the totals are unavailable (``None`` or
    zero) the message is returned unchanged. Percentages are clamped to
    ``[0, 100]``.
    """

    if completed_steps is None or total_steps in {None, 0}:
        return message

    try:
        ratio = float(completed_steps) / float(total_steps)
    except (TypeError, ValueError):
        return message

    clamped = max(0.0, min(ratio, 1.0))
    percent = int(round(clamped * 100))
    return f"{message} ({percent}%)"


def build_window_progress_message(
    label: str,
    completed_windows: Optional[int],
    total_windows: Optional[int],
) -> str:
    """Return ``====> Window i/n: label (p%)`` for the CLI progress line."""

    if completed_windows is not None and total_windows:
        index = min(int(completed_windows) + 1, int(total_windows))
        message = f"====> Window {index}/{int(total_windows)}: {label}"
    else:
        message = f"====> {label}"
    return format_progress_message(message, completed_windows, total_windows)


__all__ = ["build_window_progress_message", "format_progress_message"]
