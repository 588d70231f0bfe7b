"""Synthetic heartbeat-instrumented applications.

Each application runs a fixed number of main-loop iterations split
round-robin over its threads. An iteration costs compute cycles plus a
number of LLC accesses, so its wall time depends on both the core's
frequency and its position on the grid. Every completed iteration emits
one heartbeat; the heart rate (HR) is estimated over a sliding window of
recent beats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import CoreId, Floorplan, avg_llc_latency


@dataclass(frozen=True)
class AppSpec:
    app_id: str
    thread_count: int
    compute_cycles_per_iteration: float
    llc_accesses_per_iteration: float
    total_iterations: int
    hard_target: tuple[float, float]  # (min_hr, max_hr) in beats/s
    window_size: int = 0  # 0 selects the default 2 * thread_count

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError(f"app {self.app_id}: thread_count must be >= 1")
        if self.total_iterations < self.thread_count:
            raise ValueError(f"app {self.app_id}: total_iterations must be >= thread_count")
        lo, hi = self.hard_target
        if not (0 < lo < hi):
            raise ValueError(f"app {self.app_id}: need 0 < min_hr < max_hr")
        if self.compute_cycles_per_iteration < 1 and self.llc_accesses_per_iteration < 1:
            raise ValueError(f"app {self.app_id}: an iteration must cost cycles or LLC accesses")
        if self.compute_cycles_per_iteration < 0 or self.llc_accesses_per_iteration < 0:
            raise ValueError(f"app {self.app_id}: iteration costs must be non-negative")
        if self.effective_window() <= self.thread_count:
            raise ValueError(
                f"app {self.app_id}: window_size must exceed thread_count"
            )

    def effective_window(self) -> int:
        # A window wider than the thread count damps the burst pattern of
        # several threads beating at nearly the same instant.
        return self.window_size if self.window_size else 2 * self.thread_count

    def iterations_for_thread(self, thread_id: int) -> int:
        base, extra = divmod(self.total_iterations, self.thread_count)
        return base + (1 if thread_id < extra else 0)


@dataclass
class ThreadState:
    app_id: str
    thread_id: int
    core: CoreId | None
    remaining_iterations: int
    progress: float = 0.0  # fraction of the current iteration, in [0, 1)
    stall_until: float = 0.0  # migration penalty: no progress before this time

    @property
    def active(self) -> bool:
        return self.remaining_iterations > 0


@dataclass
class HeartbeatLog:
    """Time-ordered heartbeats of one application, all threads merged."""

    window_size: int
    beats: list[tuple[float, int]] = field(default_factory=list)

    def record(self, timestamp: float, thread_id: int) -> None:
        if self.beats and timestamp < self.beats[-1][0]:
            raise ValueError("heartbeat timestamps must be non-decreasing")
        self.beats.append((timestamp, thread_id))

    def extend(self, beats) -> None:
        for t, tid in beats:
            self.record(t, tid)


def iteration_time(spec: AppSpec, core: CoreId, freq_hz: float, fp: Floorplan) -> float:
    """Seconds one main-loop iteration takes on `core` at `freq_hz`."""
    compute = spec.compute_cycles_per_iteration / freq_hz
    memory = spec.llc_accesses_per_iteration * avg_llc_latency(core, fp)
    return compute + memory


def advance_thread(
    thread: ThreadState,
    spec: AppSpec,
    dt: float,
    freq_hz: float,
    fp: Floorplan,
    now: float,
) -> list[tuple[float, int]]:
    """Advance one thread by `dt` seconds starting at `now`.

    Consumes any pending migration stall first, then completes iterations
    at the thread's current rate. Returns the heartbeats emitted, each
    with its exact in-epoch completion timestamp. Mutates `thread`.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if not thread.active or thread.core is None or dt == 0:
        return []
    end = now + dt
    cursor = max(now, thread.stall_until)
    if cursor >= end:
        return []
    it_time = iteration_time(spec, thread.core, freq_hz, fp)
    beats = []
    while thread.active and cursor < end:
        needed = (1.0 - thread.progress) * it_time
        if cursor + needed <= end:
            cursor += needed
            thread.progress = 0.0
            thread.remaining_iterations -= 1
            beats.append((cursor, thread.thread_id))
        else:
            thread.progress += (end - cursor) / it_time
            cursor = end
    return beats


def heart_rate(log: HeartbeatLog, now: float) -> float | None:
    """Window HR estimate in beats/s, or None when there is not enough data.

    Uses the last `window_size` beats (all beats if fewer are available):
    (n - 1) / (t_last - t_first). None with under 2 beats or a zero span.
    """
    del now  # the window is beat-counted, not time-based
    beats = log.beats[-log.window_size:]
    if len(beats) < 2:
        return None
    span = beats[-1][0] - beats[0][0]
    if span <= 0:
        return None
    return (len(beats) - 1) / span
