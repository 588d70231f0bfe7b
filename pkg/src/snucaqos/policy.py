"""Reactive heartbeat QoS controller.

Per epoch the measured HR is classified against the app's soft target
range into one of five states (A far below, B slightly below, C inside,
D slightly above, E far above). Out-of-range states trigger a
frequency step or a thread migration, with a secondary action when the
primary is unavailable. Inside the range a probe loop compares the HR
ratio against the power ratio and walks the frequency toward the point
of least energy per heartbeat. Repeated overshoots halve the step sizes
and shrink the soft range inside the fixed hard range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .actions import (
    Action,
    Decision,
    Hold,
    MigrateAwayFromCenter,
    MigrateTowardCenter,
    Observation,
    SetFrequency,
)
from .power import FrequencyTable

LOW_STATES = ("A", "B")
HIGH_STATES = ("D", "E")

# Soft range may never shrink below this fraction of the hard range.
SOFT_WIDTH_FLOOR_FRACTION = 0.2
# Each overshoot-triggered adjustment moves a soft bound inward by this
# fraction of the hard-range width.
SOFT_SHRINK_FRACTION = 0.05


@dataclass
class TargetRange:
    hard_min: float
    hard_max: float
    soft_min: float
    soft_max: float
    proximity_fraction: float = 0.10

    def __post_init__(self):
        if not (0 < self.hard_min < self.hard_max):
            raise ValueError("need 0 < hard_min < hard_max")
        if not (self.hard_min <= self.soft_min < self.soft_max <= self.hard_max):
            raise ValueError("soft range must lie inside the hard range")
        if not (0 < self.proximity_fraction < 1):
            raise ValueError("proximity_fraction must be in (0, 1)")

    @classmethod
    def from_hard(cls, hard_min: float, hard_max: float, proximity_fraction: float = 0.10):
        """Initial soft range equals the hard range."""
        return cls(hard_min, hard_max, hard_min, hard_max, proximity_fraction)

    @property
    def hard_width(self) -> float:
        return self.hard_max - self.hard_min

    @property
    def soft_width(self) -> float:
        return self.soft_max - self.soft_min


@dataclass
class ProbeState:
    hr_prev: float = 0.0
    power_prev: float = 0.0
    pending: bool = False
    from_hz: float = 0.0  # frequency before the pending step, for undo


@dataclass
class PolicyState:
    target: TargetRange
    macro_step_hz: float = 0.5e9
    micro_step_hz: float = 0.1e9
    prev_state: str | None = None
    min_count: int = 0
    max_count: int = 0
    overshoot_limit: int = 5
    probe: ProbeState = field(default_factory=ProbeState)
    energy_direction: str = "up"  # up | down | hold ("hold" latches)
    ratio_tolerance: float = 0.02

    def __post_init__(self):
        if self.micro_step_hz > self.macro_step_hz:
            raise ValueError("micro_step must not exceed macro_step")
        if self.micro_step_hz <= 0:
            raise ValueError("steps must be positive")
        if self.min_count < 0 or self.max_count < 0 or self.overshoot_limit < 0:
            raise ValueError("counters must be non-negative")


def classify_state(hr: float, t: TargetRange) -> str:
    """Total mapping of a positive HR onto A/B/C/D/E.

    Proximity is multiplicative on the nearer soft boundary; both soft
    boundaries themselves classify as C.
    """
    p = t.proximity_fraction
    if hr < t.soft_min * (1 - p):
        return "A"
    if hr < t.soft_min:
        return "B"
    if hr <= t.soft_max:
        return "C"
    if hr <= t.soft_max * (1 + p):
        return "D"
    return "E"


def adjust_parameters(
    prev: str | None, curr: str, ps: PolicyState, grid_step_hz: float
) -> bool:
    """Overshoot adaptation, run once per epoch before action selection.

    Returns True when a soft bound moved (callers must then restart any
    in-flight energy probe against the new geometry).
    """
    if prev is None:
        return False
    t = ps.target
    jumped_across = (prev in LOW_STATES and curr in HIGH_STATES) or (
        prev in HIGH_STATES and curr in LOW_STATES
    )
    if jumped_across:
        ps.macro_step_hz = max(ps.macro_step_hz / 2, grid_step_hz)
        ps.micro_step_hz = max(ps.micro_step_hz / 2, grid_step_hz)
        return False
    if prev == "C" and curr in LOW_STATES:
        ps.min_count += 1
        if ps.min_count > ps.overshoot_limit:
            ps.min_count = 0
            floor = SOFT_WIDTH_FLOOR_FRACTION * t.hard_width
            new_min = min(t.soft_min + SOFT_SHRINK_FRACTION * t.hard_width, t.soft_max - floor)
            if new_min > t.soft_min:
                t.soft_min = new_min
                return True
        return False
    if prev == "C" and curr in HIGH_STATES:
        ps.max_count += 1
        if ps.max_count > ps.overshoot_limit:
            ps.max_count = 0
            floor = SOFT_WIDTH_FLOOR_FRACTION * t.hard_width
            new_max = max(t.soft_max - SOFT_SHRINK_FRACTION * t.hard_width, t.soft_min + floor)
            if new_max < t.soft_max:
                t.soft_max = new_max
                return True
        return False
    return False


def variable_step_hz(ps: PolicyState, hr: float, direction: str) -> float:
    """Raw in-range step: large far from the approached boundary, small
    near it. Snapping to the grid (minimum one step) happens at apply
    time."""
    t = ps.target
    width = t.soft_width
    if direction == "up":
        return ps.macro_step_hz * (t.soft_max - hr) / width
    if direction == "down":
        return ps.macro_step_hz * (hr - t.soft_min) / width
    raise ValueError(f"unknown direction {direction!r}")


def select_action(
    state: str,
    *,
    freq_at_max: bool,
    freq_at_min: bool,
    can_migrate_in: bool,
    can_migrate_out: bool,
) -> str:
    """Hierarchical action table; secondary only when primary unavailable.

    Returns one of: macro_increase, micro_increase, macro_decrease,
    micro_decrease, migrate_in, migrate_out, energy, hold.
    """
    if state == "A":
        if not freq_at_max:
            return "macro_increase"
        if can_migrate_in:
            return "migrate_in"
        return "hold"
    if state == "B":
        if can_migrate_in:
            return "migrate_in"
        if not freq_at_max:
            return "micro_increase"
        return "hold"
    if state == "C":
        return "energy"
    if state == "D":
        if can_migrate_out:
            return "migrate_out"
        if not freq_at_min:
            return "micro_decrease"
        return "hold"
    if state == "E":
        if not freq_at_min:
            return "macro_decrease"
        if can_migrate_out:
            return "migrate_out"
        return "hold"
    raise ValueError(f"unknown state {state!r}")


def energy_optimize(
    ps: PolicyState,
    hr: float,
    power_w: float,
    freq_hz: float,
    table: FrequencyTable,
) -> tuple[Action, str, float | None, float | None]:
    """In-range probe loop minimizing energy per heartbeat.

    Phase 1 records a baseline and commands an upward probe; phase 2
    compares the HR ratio against the power ratio. Nearly equal ratios
    mean the knee is reached: latch hold. A larger HR ratio means the
    probe paid off: keep it and re-probe. A smaller one means it hurt:
    undo the probe and undershoot one variable step below it. Any
    command predicted (by HR-proportional extrapolation) to leave the
    target range is replaced by hold.
    """
    t = ps.target
    if ps.energy_direction == "hold":
        return Hold("latched"), "latched", None, None
    pr = ps.probe
    r_hr: float | None = None
    r_p: float | None = None
    if pr.pending:
        if pr.hr_prev <= 0 or pr.power_prev <= 0:
            pr.pending = False  # cannot form ratios, restart the probe
        else:
            r_hr = hr / pr.hr_prev
            r_p = power_w / pr.power_prev
            if abs(r_hr - r_p) <= ps.ratio_tolerance:
                pr.pending = False
                ps.energy_direction = "hold"
                return Hold("optimum"), "optimum", r_hr, r_p
            if r_hr < r_p:
                pr.pending = False
                ps.energy_direction = "down"
                cand = table.apply_step(pr.from_hz, variable_step_hz(ps, hr, "down"), up=False)
                if cand == freq_hz or hr * cand / freq_hz < t.soft_min:
                    return Hold("guard"), "guard_hold", r_hr, r_p
                return SetFrequency(cand), "undo_undershoot", r_hr, r_p
            # beneficial: fall through and re-probe from a fresh baseline
            pr.pending = False
    pr.hr_prev = hr
    pr.power_prev = power_w
    pr.from_hz = freq_hz
    ps.energy_direction = "up"
    cand = table.apply_step(freq_hz, variable_step_hz(ps, hr, "up"), up=True)
    if cand == freq_hz or hr * cand / freq_hz > t.soft_max:
        return Hold("guard"), "guard_hold", r_hr, r_p
    pr.pending = True
    return SetFrequency(cand), "probe_up", r_hr, r_p


def reset_probe(ps: PolicyState) -> None:
    ps.probe.pending = False
    if ps.energy_direction == "hold":
        ps.energy_direction = "up"


class QosController:
    """Drives one application's PolicyState from epoch observations."""

    def __init__(self, ps: PolicyState, table: FrequencyTable):
        self.ps = ps
        self.table = table

    def decide(self, obs: Observation) -> Decision:
        ps = self.ps
        t = ps.target
        audit = dict(
            macro_step_hz=ps.macro_step_hz,
            micro_step_hz=ps.micro_step_hz,
            soft_min=t.soft_min,
            soft_max=t.soft_max,
        )
        if obs.hr is None:
            # no usable measurement: hold everything, keep prev_state
            return Decision([Hold("no_hr")], state="", note="no_hr", **audit)
        curr = classify_state(obs.hr, t)
        soft_changed = adjust_parameters(ps.prev_state, curr, ps, self.table.grid_step_hz)
        if curr != "C" or soft_changed:
            reset_probe(ps)
        audit.update(
            macro_step_hz=ps.macro_step_hz,
            micro_step_hz=ps.micro_step_hz,
            soft_min=t.soft_min,
            soft_max=t.soft_max,
        )
        kind = select_action(
            curr,
            freq_at_max=obs.freq_at_max,
            freq_at_min=obs.freq_at_min,
            can_migrate_in=obs.can_migrate_in,
            can_migrate_out=obs.can_migrate_out,
        )
        note = kind
        r_hr = r_p = None
        if kind == "energy":
            action, note, r_hr, r_p = energy_optimize(
                ps, obs.hr, obs.app_power_w, obs.freq_hz, self.table
            )
        elif kind == "macro_increase":
            action = SetFrequency(self.table.apply_step(obs.freq_hz, ps.macro_step_hz, up=True))
        elif kind == "micro_increase":
            action = SetFrequency(self.table.apply_step(obs.freq_hz, ps.micro_step_hz, up=True))
        elif kind == "macro_decrease":
            action = SetFrequency(self.table.apply_step(obs.freq_hz, ps.macro_step_hz, up=False))
        elif kind == "micro_decrease":
            action = SetFrequency(self.table.apply_step(obs.freq_hz, ps.micro_step_hz, up=False))
        elif kind == "migrate_in":
            action = MigrateTowardCenter()
        elif kind == "migrate_out":
            action = MigrateAwayFromCenter()
        else:
            action = Hold()
        ps.prev_state = curr
        return Decision([action], state=curr, note=note, r_hr=r_hr, r_p=r_p, **audit)
