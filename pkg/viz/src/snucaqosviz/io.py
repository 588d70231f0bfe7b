"""Readers for the simulator's file artifacts.

The column list and summary keys below restate the producer's documented
output contract; the files are the interface, so the names are spelled
out here rather than imported. Extra columns/keys are tolerated (the
producer may grow its schema), missing ones are an error naming exactly
what is absent.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

TRACE_COLUMNS = [
    "epoch", "time_s", "app_id", "hr", "state", "freq_hz", "hard_min",
    "hard_max", "soft_min", "soft_max", "action", "note", "macro_step_hz",
    "micro_step_hz", "r_hr", "r_p", "migrated_thread", "migrate_from",
    "migrate_to", "app_power_w", "chip_power_w", "chip_energy_j",
]

SUMMARY_SCHEMA = "snucaqos-summary-v1"
SUMMARY_KEYS = ["label", "policy", "seed", "total_energy_j", "apps"]
SUMMARY_APP_KEYS = ["app_id", "energy_j", "residency"]


class SchemaError(ValueError):
    """An artifact does not match the documented schema."""


def _float_or_none(cell: str) -> float | None:
    return None if cell == "" else float(cell)


def load_trace(path: str | Path) -> list[dict]:
    """Rows of a trace.csv as typed dicts, in file order.

    Numeric cells become floats (empty cells None); epoch becomes int.
    Raises SchemaError on a missing header, missing columns, or a trace
    with no data rows.
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a trace header")
        missing = [c for c in TRACE_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing trace column(s): {', '.join(missing)}")
        raw = [dict(zip(header, row)) for row in reader]
    if not raw:
        raise SchemaError(f"{path}: trace has a header but no rows")
    rows = []
    for r in raw:
        rows.append(
            {
                **r,
                "epoch": int(r["epoch"]),
                "time_s": float(r["time_s"]),
                "hr": _float_or_none(r["hr"]),
                "freq_hz": float(r["freq_hz"]),
                "hard_min": float(r["hard_min"]),
                "hard_max": float(r["hard_max"]),
                "soft_min": _float_or_none(r["soft_min"]),
                "soft_max": _float_or_none(r["soft_max"]),
                "migrated_thread": r["migrated_thread"] or None,
            }
        )
    return rows


def load_summary(path: str | Path) -> dict:
    """A summary.json as a dict, schema-checked."""
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: summary root must be an object")
    if data.get("schema") != SUMMARY_SCHEMA:
        raise SchemaError(
            f"{path}: expected schema {SUMMARY_SCHEMA!r}, got {data.get('schema')!r}"
        )
    missing = [k for k in SUMMARY_KEYS if k not in data]
    if missing:
        raise SchemaError(f"{path}: missing summary key(s): {', '.join(missing)}")
    if not isinstance(data["apps"], list) or not data["apps"]:
        raise SchemaError(f"{path}: 'apps' must be a non-empty list")
    for i, app in enumerate(data["apps"]):
        app_missing = [k for k in SUMMARY_APP_KEYS if k not in app]
        if app_missing:
            raise SchemaError(
                f"{path}: missing summary key(s): "
                + ", ".join(f"apps[{i}].{k}" for k in app_missing)
            )
    return data
