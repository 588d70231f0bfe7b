"""Artifact writers and the cross-policy comparison report.

trace.csv: one row per epoch per app. Columns, in order:
  epoch            epoch index, 0-based
  time_s           epoch start time = epoch * epoch_length_s
  app_id
  hr               measured heart rate (beats/s); empty before enough
                   beats exist and after the app finishes
  state            policy state A..E ("done" after completion; empty
                   for baseline policies and insufficient-data epochs)
  freq_hz          the app's unified core frequency during this epoch
  hard_min/hard_max  the app's hard target range (constant per app)
  soft_min/soft_max  current soft target bounds (QoS policy only)
  action           what was applied this epoch (e.g. set_frequency,
                   migrate_in, migrate_in_unavailable, hold, none)
  note             policy-internal detail (probe_up, optimum, guard_hold,
                   latched, undo_undershoot, pid, greedy, fixed, no_hr)
  macro_step_hz/micro_step_hz  current QoS step sizes
  r_hr/r_p         energy-probe ratio pair when one was evaluated
  migrated_thread  thread id moved this epoch (at most one per app)
  migrate_from/migrate_to  core coordinates "x:y"
  app_power_w      power of this app's busy cores this epoch
  chip_power_w     whole-chip power this epoch (same on all rows of an
                   epoch)
  chip_energy_j    cumulative chip energy including this epoch

Floats are written with repr so parsing them back is lossless and the
byte stream is reproducible for identical runs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .engine import TraceRow

TRACE_COLUMNS = [
    "epoch", "time_s", "app_id", "hr", "state", "freq_hz", "hard_min",
    "hard_max", "soft_min", "soft_max", "action", "note", "macro_step_hz",
    "micro_step_hz", "r_hr", "r_p", "migrated_thread", "migrate_from",
    "migrate_to", "app_power_w", "chip_power_w", "chip_energy_j",
]

SUMMARY_SCHEMA = "snucaqos-summary-v1"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trace(rows: list[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for r in rows:
            writer.writerow(_cell(getattr(r, col)) for col in TRACE_COLUMNS)


def load_trace(path: str | Path) -> list[dict]:
    """Trace rows as dicts; numeric columns parsed, empty cells -> None."""
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header in {path}: {reader.fieldnames}")
        for raw in reader:
            row = {}
            for key, val in raw.items():
                if key in ("app_id", "state", "action", "note", "migrate_from", "migrate_to"):
                    row[key] = val
                elif val == "":
                    row[key] = None
                elif key in ("epoch", "migrated_thread"):
                    row[key] = int(val)
                else:
                    row[key] = float(val)
            out.append(row)
    return out


def write_summary(summary: dict, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")


def load_summary(path: str | Path) -> dict:
    with open(path) as f:
        summary = json.load(f)
    if summary.get("schema") != SUMMARY_SCHEMA:
        raise ValueError(f"{path}: expected schema {SUMMARY_SCHEMA!r}, got {summary.get('schema')!r}")
    return summary


RESIDENCY_GATE = 0.95


def _scenario_key(summary: dict) -> tuple:
    return summary.get("label", ""), summary.get("seed", 0)


def _scenario_metrics(summary: dict) -> dict:
    apps = summary["apps"]
    residencies = [a["residency"] if a["residency"] is not None else 0.0 for a in apps]
    entries = [a["first_entry_epoch"] for a in apps]
    return {
        "energy_j": summary["total_energy_j"],
        "residency": min(residencies) if residencies else 0.0,
        "convergence_epoch": (
            None if not entries or any(e is None for e in entries) else max(entries)
        ),
    }


def compare(summaries: list[dict]) -> dict:
    """Cross-policy comparison over matched scenarios.

    Energy deltas of the QoS policy against each baseline are computed
    only over scenarios where both policies kept residency at or above
    95%; others are listed as excluded.
    """
    if len(summaries) < 2:
        raise ValueError("compare needs at least 2 summaries")
    by_policy: dict[str, dict] = {}
    for s in summaries:
        by_policy.setdefault(s["policy"], {})[_scenario_key(s)] = s
    policies = sorted(by_policy)
    keysets = {p: set(d) for p, d in by_policy.items()}
    reference = keysets[policies[0]]
    for p, keys in keysets.items():
        if keys != reference:
            raise ValueError(
                f"mismatched scenarios: policy {p!r} covers {sorted(keys)}, "
                f"expected {sorted(reference)}"
            )
    keys = sorted(reference)
    scenarios = []
    for key in keys:
        scenarios.append(
            {
                "label": key[0],
                "seed": key[1],
                "policies": {p: _scenario_metrics(by_policy[p][key]) for p in policies},
            }
        )
    deltas = {}
    if "qos" in by_policy:
        for base in policies:
            if base == "qos":
                continue
            rel, excluded = [], []
            for sc, key in zip(scenarios, keys):
                q, b = sc["policies"]["qos"], sc["policies"][base]
                if q["residency"] >= RESIDENCY_GATE and b["residency"] >= RESIDENCY_GATE:
                    rel.append((q["energy_j"] - b["energy_j"]) / b["energy_j"])
                else:
                    excluded.append(f"{key[0]}#{key[1]}")
            deltas[base] = {
                "mean_delta_pct": 100 * sum(rel) / len(rel) if rel else None,
                "scenarios_compared": len(rel),
                "excluded": excluded,
            }
    return {"policies": policies, "scenarios": scenarios, "deltas": deltas}


def format_compare(result: dict) -> str:
    lines = []
    header = f"{'scenario':<24} {'policy':<8} {'energy_j':>12} {'residency':>10} {'converged':>10}"
    lines.append(header)
    lines.append("-" * len(header))
    for sc in result["scenarios"]:
        name = f"{sc['label']}#{sc['seed']}"
        for p in result["policies"]:
            m = sc["policies"][p]
            conv = "-" if m["convergence_epoch"] is None else str(m["convergence_epoch"])
            lines.append(
                f"{name:<24} {p:<8} {m['energy_j']:>12.6f} {m['residency']:>10.3f} {conv:>10}"
            )
            name = ""
    for base, d in result["deltas"].items():
        if d["mean_delta_pct"] is None:
            lines.append(f"qos vs {base}: no scenario had both policies at >={RESIDENCY_GATE:.0%} residency")
        else:
            lines.append(
                f"qos vs {base}: mean energy delta {d['mean_delta_pct']:+.2f}% "
                f"over {d['scenarios_compared']} scenario(s)"
            )
        if d["excluded"]:
            lines.append(f"  excluded (residency < {RESIDENCY_GATE:.0%}): {', '.join(d['excluded'])}")
    return "\n".join(lines)
