"""Scenario generation: workload presets, achievable-HR envelopes, and
seeded feasible target ranges.

The envelope for a workload is measured empirically by two short
fixed-policy runs: highest frequency with threads packed at the center,
and lowest frequency with threads pushed to the edges. Target ranges
are then drawn uniformly inside the envelope, resampled until the two
endpoints are at least 10% of the envelope width apart.
"""

from __future__ import annotations

import json
import random
from functools import lru_cache
from importlib import resources

from .engine import SimConfig, run
from .workload import AppSpec

PRESET_NAMES = ("cpu", "mem", "moderate")
ENVELOPE_EPOCHS = 200


def load_preset(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}, expected one of {'/'.join(PRESET_NAMES)}")
    text = (resources.files("snucaqos") / "presets" / f"{name}.json").read_text()
    return json.loads(text)


def preset_app(
    name: str,
    thread_count: int,
    hard_target: tuple[float, float],
    iterations: int | None = None,
    app_id: str | None = None,
) -> AppSpec:
    preset = load_preset(name)
    if iterations is None:
        iterations = thread_count * int(preset["iterations_per_thread"])
    # Latency-heavy presets need longer beat windows: per-core rate spread
    # makes short windows alias the thread mix from epoch to epoch. The +1
    # makes the window span whole per-thread rotations of the merged beat
    # stream, so equal-rate placements measure exactly despite phase.
    window_factor = int(preset.get("window_factor", 2))
    return AppSpec(
        app_id=app_id or f"{name}-t{thread_count}",
        thread_count=thread_count,
        compute_cycles_per_iteration=float(preset["compute_cycles_per_iteration"]),
        llc_accesses_per_iteration=float(preset["llc_accesses_per_iteration"]),
        total_iterations=iterations,
        hard_target=hard_target,
        window_size=window_factor * thread_count + 1,
    )


def hr_envelope(spec: AppSpec, cfg: SimConfig, epochs: int = ENVELOPE_EPOCHS) -> tuple[float, float]:
    """Min and max steady-state HR achievable for `spec` under `cfg`'s
    hardware model, from two fixed-policy settling runs."""

    def steady_hr(freq_hz: float, placement: str) -> float:
        probe = SimConfig(
            apps=[spec],
            floorplan=cfg.floorplan,
            table=cfg.table,
            power=cfg.power,
            policy="fixed",
            epoch_length_s=cfg.epoch_length_s,
            migration_penalty_s=cfg.migration_penalty_s,
            max_sim_time_s=epochs * cfg.epoch_length_s,
            placement=placement,
            initial_freq_hz=freq_hz,
            label="envelope",
        )
        hrs = [r.hr for r in run(probe).rows if r.hr is not None]
        if not hrs:
            raise ValueError(f"app {spec.app_id}: envelope run produced no HR measurement")
        return hrs[-1]

    hi = steady_hr(cfg.table.max_hz, "toward_center")
    lo = steady_hr(cfg.table.min_hz, "away_from_center")
    if not lo < hi:
        raise ValueError(f"app {spec.app_id}: degenerate envelope ({lo}, {hi})")
    return lo, hi


def sample_target_range(envelope: tuple[float, float], seed: int) -> tuple[float, float]:
    """Two uniform draws inside the envelope, at least 10% of the
    envelope width apart; deterministic per seed."""
    lo, hi = envelope
    rng = random.Random(seed)
    width = hi - lo
    while True:
        a = rng.uniform(lo, hi)
        b = rng.uniform(lo, hi)
        if abs(a - b) >= 0.1 * width:
            return min(a, b), max(a, b)


@lru_cache(maxsize=None)
def preset_envelope(name: str, thread_count: int) -> tuple[float, float]:
    """Envelope of a preset workload under the default hardware model;
    cached because acceptance sweeps reuse the same combinations."""
    spec = preset_app(name, thread_count, hard_target=(1.0, 2.0))
    return hr_envelope(spec, SimConfig(apps=[]))


def build_scenario(
    preset_name: str,
    thread_count: int,
    seed: int,
    policy: str = "qos",
    policy_params: dict | None = None,
    epochs: int = 300,
    envelope: tuple[float, float] | None = None,
    placement: str = "toward_center",
) -> SimConfig:
    """A complete single-app experiment with a seeded feasible target.

    `placement` sets the starting thread placement: "toward_center" models
    a scheduler-managed start, "away_from_center" an unmanaged one that
    the policy must improve itself (used for policy comparisons).
    """
    if envelope is None:
        envelope = preset_envelope(preset_name, thread_count)
    target = sample_target_range(envelope, seed)
    app = preset_app(preset_name, thread_count, hard_target=target)
    # Control period must cover the beat window's time span, or decisions
    # react to readings that predate their previous action.
    epoch_length = float(load_preset(preset_name).get("epoch_length_s", 1e-3))
    return SimConfig(
        apps=[app],
        policy=policy,
        policy_params=dict(policy_params or {}),
        epoch_length_s=epoch_length,
        max_sim_time_s=epochs * epoch_length,
        seed=seed,
        placement=placement,
        label=f"{preset_name}-t{thread_count}",
    )
