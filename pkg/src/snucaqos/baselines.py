"""Comparison policies: a fixed-frequency null controller, a greedy
throughput maximizer, and a PID heart-rate tracker.

The PID tracker drives the HR toward the midpoint of the hard target
range with an additive frequency correction; when the command saturates
at the top of the table it asks for a migration toward the center. The
greedy policy ignores heartbeats entirely: maximum frequency plus
center-seeking migrations every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .actions import Decision, Hold, MigrateTowardCenter, Observation, SetFrequency
from .power import FrequencyTable


class FixedController:
    """Null policy: never touches any knob (frequency set by config)."""

    def decide(self, obs: Observation) -> Decision:
        return Decision([Hold()], note="fixed")


class GreedyController:
    """Max frequency always; migrate the worst-placed thread inward."""

    def __init__(self, table: FrequencyTable):
        self.table = table

    def decide(self, obs: Observation) -> Decision:
        actions = []
        if obs.freq_hz != self.table.max_hz:
            actions.append(SetFrequency(self.table.max_hz))
        if obs.can_migrate_in:
            actions.append(MigrateTowardCenter())
        if not actions:
            actions.append(Hold())
        return Decision(actions, note="greedy")


@dataclass
class PidState:
    kp: float
    ki: float
    kd: float
    setpoint: float  # beats/s, midpoint of the hard target range
    integral: float = 0.0  # accumulated error, (beats/s) * s
    prev_error: float | None = None
    integral_clamp_hz: float = 3.0e9  # bound on the ki * integral term

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if self.integral_clamp_hz < 0:
            raise ValueError("integral_clamp_hz must be non-negative")


def hpm_step(pid: PidState, hr: float, dt: float, freq_hz: float, table: FrequencyTable) -> tuple[float, bool]:
    """One PID update; returns (snapped frequency command, saturated-high).

    The raw output is a frequency delta in Hz added to the current
    frequency and snapped to the grid. The integral is clamped so its
    term never exceeds integral_clamp_hz (anti-windup).
    """
    error = pid.setpoint - hr
    pid.integral += error * dt
    if pid.ki > 0:
        bound = pid.integral_clamp_hz / pid.ki
        pid.integral = min(max(pid.integral, -bound), bound)
    derivative = 0.0 if pid.prev_error is None else (error - pid.prev_error) / dt
    pid.prev_error = error
    delta_hz = pid.kp * error + pid.ki * pid.integral + pid.kd * derivative
    target = freq_hz + delta_hz
    saturated = target > table.max_hz and error > 0
    return table.snap_hz(target), saturated


class HpmController:
    """Hierarchical power manager stand-in: PID on the hard-range midpoint."""

    def __init__(self, pid: PidState, table: FrequencyTable):
        self.pid = pid
        self.table = table

    def decide(self, obs: Observation) -> Decision:
        if obs.hr is None:
            return Decision([Hold("no_hr")], note="no_hr")
        command, saturated = hpm_step(self.pid, obs.hr, obs.dt_s, obs.freq_hz, self.table)
        actions = []
        if command != obs.freq_hz:
            actions.append(SetFrequency(command))
        if saturated and obs.can_migrate_in:
            actions.append(MigrateTowardCenter())
        if not actions:
            actions.append(Hold())
        return Decision(actions, note="pid")
