"""The two figure styles: per-app HR panels and grouped energy bars.

Uses the object-oriented matplotlib API only (no pyplot), so rendering
holds no global state and repeated invocations are independent. Inputs
are validated before any figure is created, so a schema error never
leaves a partial output file behind. Both functions return the rendered
Figure so callers (and tests) can inspect what was drawn.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from .io import SchemaError, load_summary, load_trace

RESIDENCY_GATE = 0.95
_HATCH = "///"


def _save(fig: Figure, out: str | Path) -> None:
    out = Path(out)
    if out.suffix.lower() == ".svg":
        # SVG embeds a creation date and uuid-salted element ids by
        # default; pin both so identical inputs render identical bytes
        with matplotlib.rc_context({"svg.hashsalt": "snucaqos-viz"}):
            fig.savefig(out, metadata={"Date": None})
    else:
        fig.savefig(out)


def _series(rows: list[dict], key: str) -> list[float]:
    return [math.nan if r[key] is None else r[key] for r in rows]


def plot_hr(trace_path: str | Path, out_path: str | Path) -> Figure:
    """One heart-rate panel per app from a trace: measured HR over time,
    shaded hard-target band, dashed soft-target bounds, and a marker per
    migration epoch."""
    rows = load_trace(trace_path)
    by_app: dict[str, list[dict]] = {}
    for row in rows:
        by_app.setdefault(row["app_id"], []).append(row)
    apps = list(by_app)

    fig = Figure(figsize=(9, 1.0 + 2.2 * len(apps)), constrained_layout=True)
    axes = fig.subplots(len(apps), 1, sharex=True, squeeze=False)[:, 0]
    for ax, app_id in zip(axes, apps):
        arows = by_app[app_id]
        times = [r["time_s"] for r in arows]
        ax.axhspan(arows[0]["hard_min"], arows[0]["hard_max"],
                   color="tab:green", alpha=0.15, label="hard target")
        for key, label in (("soft_min", "soft bounds"), ("soft_max", None)):
            soft = _series(arows, key)
            if any(not math.isnan(v) for v in soft):
                ax.plot(times, soft, ls="--", lw=0.9, color="tab:olive", label=label)
        ax.plot(times, _series(arows, "hr"), lw=1.2, color="tab:blue", label="HR")
        migrations = [r["time_s"] for r in arows if r["migrated_thread"] is not None]
        for i, t in enumerate(migrations):
            ax.axvline(t, color="tab:red", alpha=0.4, lw=0.8,
                       label="migration" if i == 0 else None)

        # explicit y limits: the band must stay visible even when HR
        # never reaches it
        visible = (
            [v for v in _series(arows, "hr") if not math.isnan(v)]
            + [arows[0]["hard_min"], arows[0]["hard_max"]]
        )
        lo, hi = min(visible), max(visible)
        pad = 0.05 * (hi - lo) or 1.0
        ax.set_ylim(lo - pad, hi + pad)
        ax.set_ylabel("HR (beats/s)")
        ax.set_title(app_id, fontsize="medium", loc="left")
        ax.legend(loc="lower right", fontsize="x-small", ncols=4)
    axes[-1].set_xlabel("time (s)")
    _save(fig, out_path)
    return fig


def plot_energy(summary_paths: list[str | Path], out_path: str | Path) -> Figure:
    """Grouped energy bars from run summaries: one bar group per
    scenario (label#seed), one bar per policy within it; a policy that
    missed the 95% residency gate in a scenario is hatched."""
    if not summary_paths:
        raise SchemaError("plot_energy needs at least one summary")
    summaries = [load_summary(p) for p in summary_paths]
    policies = sorted({s["policy"] for s in summaries})
    scenarios = sorted({f"{s['label']}#{s['seed']}" for s in summaries})
    cells: dict[tuple[str, str], dict] = {}
    for s in summaries:
        cells[(f"{s['label']}#{s['seed']}", s["policy"])] = s

    fig = Figure(figsize=(1.6 + 1.1 * len(scenarios), 4.2), constrained_layout=True)
    ax = fig.subplots()
    width = 0.8 / len(policies)
    any_hatched = False
    for j, policy in enumerate(policies):
        xs, heights, hatches = [], [], []
        for i, scenario in enumerate(scenarios):
            s = cells.get((scenario, policy))
            if s is None:
                continue
            xs.append(i + (j - (len(policies) - 1) / 2) * width)
            heights.append(s["total_energy_j"])
            gated = min(a["residency"] or 0.0 for a in s["apps"]) < RESIDENCY_GATE
            hatches.append(_HATCH if gated else "")
            any_hatched |= gated
        bars = ax.bar(xs, heights, width=width * 0.92, color=f"C{j}",
                      edgecolor="black", linewidth=0.4, label=policy)
        for bar, hatch in zip(bars, hatches):
            bar.set_hatch(hatch)
    ax.set_xticks(range(len(scenarios)), scenarios,
                  rotation=25, ha="right", fontsize="small")
    ax.set_ylabel("energy (J)")
    handles, labels = ax.get_legend_handles_labels()
    if any_hatched:
        handles.append(Patch(facecolor="white", edgecolor="black", hatch=_HATCH))
        labels.append(f"residency < {RESIDENCY_GATE:.0%}")
    ax.legend(handles, labels, fontsize="small")
    _save(fig, out_path)
    return fig
