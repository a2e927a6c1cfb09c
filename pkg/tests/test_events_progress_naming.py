from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from app.services.events import emit_file_event, emit_task_event, sanitize_context_value
from app.services.naming import build_result_stem, slugify
from app.services.progress import build_window_progress_message, format_progress_message


def test_sanitize_handles_numpy_complex_and_paths() -> None:
    assert sanitize_context_value(np.float64(1.5)) == 1.5
    assert sanitize_context_value(np.int64(3)) == 3
    assert sanitize_context_value(float("inf")) == "inf"
    assert sanitize_context_value(1 + 2j) == "1+2j"
    assert sanitize_context_value(Path("/tmp/x.json")) == "/tmp/x.json"
    assert sanitize_context_value(np.array([1.0, 2.0])) == "1.0, 2.0"
    assert sanitize_context_value("   ") is None


def test_task_event_carries_structured_extras(caplog) -> None:
    with caplog.at_level(logging.INFO, logger="drum_eigen.events"):
        emit_task_event("window", "Window solved", payload={"roots": 3}, duration_ms=12.5)

    record = caplog.records[-1]
    assert record.solver_event_type == "TASK_STATE"
    assert record.solver_context == {"phase": "window"}
    assert record.solver_payload == {"roots": 3}
    assert record.solver_duration_ms == 12.5
    assert "[TASK_STATE] Window solved" in record.getMessage()


def test_file_event_uses_file_op_type(caplog) -> None:
    with caplog.at_level(logging.INFO, logger="drum_eigen.events"):
        emit_file_event("JSON written", payload={"path": Path("out.json")})

    record = caplog.records[-1]
    assert record.solver_event_type == "FILE_OP"
    assert record.solver_payload == {"path": "out.json"}


def test_progress_messages() -> None:
    assert format_progress_message("Working", 1, 4) == "Working (25%)"
    assert format_progress_message("Working", None, 4) == "Working"
    assert format_progress_message("Working", 5, 4) == "Working (100%)"
    assert build_window_progress_message("[2.0, 4.0]", 0, 2) == "====> Window 1/2: [2.0, 4.0] (0%)"
    assert build_window_progress_message("Solve finished", 2, 2) == (
        "====> Window 2/2: Solve finished (100%)"
    )


def test_result_stems_are_filesystem_friendly() -> None:
    assert slugify("Disk r=1.5") == "disk-r-1p5"
    assert build_result_stem("solve", "disk-r1", (2, 6.5)) == "solve-disk-r1-2-to-6p5"
    assert build_result_stem("modes", "crescent") == "modes-crescent"
