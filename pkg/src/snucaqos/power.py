"""DVFS operating points and the per-core power/energy model.

Power for a busy core is the standard CMOS approximation
P = P_static + kappa * V^2 * f; an unoccupied core draws a flat idle
power. Energy integrates power left-Riemann over epochs, which is exact
here because frequency is constant within an epoch.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass


@dataclass(frozen=True)
class OperatingPoint:
    freq_hz: float
    voltage_v: float


class FrequencyTable:
    """Ordered discrete DVFS points, strictly increasing in frequency."""

    def __init__(self, points):
        pts = [OperatingPoint(float(f), float(v)) for f, v in points]
        if len(pts) < 2:
            raise ValueError("frequency table needs at least 2 points")
        for prev, cur in zip(pts, pts[1:]):
            if cur.freq_hz <= prev.freq_hz:
                raise ValueError("frequencies must be strictly increasing")
            if cur.voltage_v < prev.voltage_v:
                raise ValueError("voltages must be non-decreasing")
        self.points = tuple(pts)
        self._freqs = [p.freq_hz for p in self.points]

    def __len__(self):
        return len(self.points)

    @property
    def min_hz(self) -> float:
        return self.points[0].freq_hz

    @property
    def max_hz(self) -> float:
        return self.points[-1].freq_hz

    @property
    def midpoint_hz(self) -> float:
        return self.points[len(self.points) // 2].freq_hz

    @property
    def grid_step_hz(self) -> float:
        """Smallest adjacent spacing; the unit for step snapping/floors."""
        return min(b - a for a, b in zip(self._freqs, self._freqs[1:]))

    def nearest_index(self, freq_hz: float) -> int:
        """Index of the closest point, clamped; ties go to the lower point."""
        i = bisect.bisect_left(self._freqs, freq_hz)
        if i == 0:
            return 0
        if i == len(self._freqs):
            return len(self._freqs) - 1
        lo, hi = self._freqs[i - 1], self._freqs[i]
        return i - 1 if freq_hz - lo <= hi - freq_hz else i

    def snap_hz(self, freq_hz: float) -> float:
        return self._freqs[self.nearest_index(freq_hz)]

    def point_at(self, freq_hz: float) -> OperatingPoint:
        return self.points[self.nearest_index(freq_hz)]

    def snap_step_hz(self, step_hz: float) -> float:
        """Round a frequency delta to the step grid, at least one step.

        Half-way values round up, away from zero.
        """
        g = self.grid_step_hz
        n = int(step_hz / g + 0.5)
        return max(1, n) * g

    def apply_step(self, freq_hz: float, step_hz: float, up: bool) -> float:
        """Move from `freq_hz` by a snapped step, clamped to the table."""
        delta = self.snap_step_hz(step_hz)
        target = freq_hz + delta if up else freq_hz - delta
        return self.snap_hz(target)


def make_linear_table(
    min_hz: float,
    max_hz: float,
    step_hz: float,
    voltage_min_v: float,
    voltage_max_v: float,
) -> FrequencyTable:
    """Uniform frequency grid with voltage scaled linearly across it."""
    if not (0 < min_hz < max_hz) or step_hz <= 0:
        raise ValueError("need 0 < min_hz < max_hz and step_hz > 0")
    count = int(round((max_hz - min_hz) / step_hz)) + 1
    points = []
    for i in range(count):
        f = min_hz + i * step_hz
        v = voltage_min_v + (voltage_max_v - voltage_min_v) * (f - min_hz) / (max_hz - min_hz)
        points.append((f, v))
    return FrequencyTable(points)


def default_frequency_table() -> FrequencyTable:
    """1.0 to 4.0 GHz in 0.1 GHz steps, voltage linear 0.8 to 1.2 V."""
    points = []
    for i in range(31):
        f = 1.0e9 + i * 0.1e9
        v = 0.8 + 0.4 * (f - 1.0e9) / 3.0e9
        points.append((f, v))
    return FrequencyTable(points)


# Calibrated so the top default point (4.0 GHz, 1.2 V) adds 1.0 W dynamic.
DEFAULT_KAPPA = 1.0 / (1.2**2 * 4.0e9)


@dataclass(frozen=True)
class PowerParams:
    static_w: float = 0.5
    idle_w: float = 0.1
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if self.static_w < 0 or self.idle_w < 0 or self.kappa < 0:
            raise ValueError("power parameters must be non-negative")


def core_power(pt: OperatingPoint, params: PowerParams, busy: bool) -> float:
    """Watts drawn by one core at `pt`."""
    if not busy:
        return params.idle_w
    return params.static_w + params.kappa * pt.voltage_v**2 * pt.freq_hz


def accumulate_energy(power_w: float, dt_s: float, acc_j: float) -> float:
    """Add one epoch's worth of energy to the accumulator."""
    if dt_s < 0:
        raise ValueError("dt must be non-negative")
    return acc_j + power_w * dt_s
