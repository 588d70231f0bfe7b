"""Shared vocabulary between policies and the simulation engine.

Policies see one Observation per app per epoch and answer with a
Decision. Migration actions are abstract (a direction); the engine owns
the concrete thread and destination-core choice so that all policies
share one deterministic placement rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Hold:
    note: str = ""


@dataclass(frozen=True)
class SetFrequency:
    freq_hz: float


@dataclass(frozen=True)
class MigrateTowardCenter:
    pass


@dataclass(frozen=True)
class MigrateAwayFromCenter:
    pass


Action = Hold | SetFrequency | MigrateTowardCenter | MigrateAwayFromCenter


@dataclass(frozen=True)
class Observation:
    """What one app's controller sees at the end of an epoch."""

    app_id: str
    epoch: int
    dt_s: float
    hr: float | None  # None: not enough heartbeats yet
    app_power_w: float
    freq_hz: float
    freq_at_max: bool
    freq_at_min: bool
    can_migrate_in: bool
    can_migrate_out: bool


@dataclass
class Decision:
    """Controller output plus audit fields copied into the trace."""

    actions: list[Action] = field(default_factory=list)
    state: str = ""  # A..E for the QoS policy, empty for baselines
    note: str = ""
    macro_step_hz: float | None = None
    micro_step_hz: float | None = None
    soft_min: float | None = None
    soft_max: float | None = None
    r_hr: float | None = None
    r_p: float | None = None
