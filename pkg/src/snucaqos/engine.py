"""Deterministic fixed-epoch simulation loop.

Each epoch: advance every thread at its app's unified frequency, measure
HR and power, record the trace, then invoke the active policy per app
and apply its actions so they take effect from the next epoch
(measure-then-act). Apps are always visited in config order and
migration planning sees earlier apps' same-epoch moves, so every run of
one config is bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import baselines, policy as qos
from .actions import Decision, Hold, MigrateAwayFromCenter, MigrateTowardCenter, Observation, SetFrequency
from .power import FrequencyTable, PowerParams, core_power, default_frequency_table
from .topology import CoreId, Floorplan, amd, rank_free_cores
from .workload import AppSpec, HeartbeatLog, ThreadState, advance_thread, heart_rate

POLICIES = ("qos", "hpm", "greedy", "fixed")


@dataclass
class SimConfig:
    apps: list[AppSpec]
    floorplan: Floorplan = field(default_factory=Floorplan)
    table: FrequencyTable = field(default_factory=default_frequency_table)
    power: PowerParams = field(default_factory=PowerParams)
    policy: str = "qos"
    policy_params: dict = field(default_factory=dict)
    epoch_length_s: float = 1e-3
    migration_penalty_s: float = 5e-5
    max_sim_time_s: float | None = None
    seed: int = 0
    placement: str = "toward_center"
    initial_freq_hz: float | None = None
    label: str = ""

    def validate(self) -> None:
        if self.epoch_length_s <= 0:
            raise ValueError("sim.epoch_length_s must be > 0")
        if self.migration_penalty_s < 0:
            raise ValueError("sim.migration_penalty_s must be >= 0")
        if self.max_sim_time_s is not None and self.max_sim_time_s <= 0:
            raise ValueError("sim.max_sim_time_s must be > 0 when set")
        if self.policy not in POLICIES:
            raise ValueError(f"policy.name must be one of {'/'.join(POLICIES)}, got {self.policy!r}")
        if self.placement not in ("toward_center", "away_from_center"):
            raise ValueError("sim.placement must be toward_center or away_from_center")
        total = sum(a.thread_count for a in self.apps)
        if total > self.floorplan.core_count:
            raise ValueError(
                f"apps: total thread count {total} exceeds {self.floorplan.core_count} cores"
            )
        ids = [a.app_id for a in self.apps]
        if len(set(ids)) != len(ids):
            raise ValueError("apps: app_id values must be unique")
        if self.initial_freq_hz is not None and not (
            self.table.min_hz <= self.initial_freq_hz <= self.table.max_hz
        ):
            raise ValueError("sim.initial_freq_hz outside the frequency table")


@dataclass
class TraceRow:
    epoch: int
    time_s: float
    app_id: str
    hr: float | None
    state: str
    freq_hz: float
    hard_min: float
    hard_max: float
    soft_min: float | None
    soft_max: float | None
    action: str
    note: str
    macro_step_hz: float | None
    micro_step_hz: float | None
    r_hr: float | None
    r_p: float | None
    migrated_thread: int | None
    migrate_from: str
    migrate_to: str
    app_power_w: float
    chip_power_w: float
    chip_energy_j: float


@dataclass
class SimResult:
    rows: list[TraceRow]
    summary: dict


class _AppRuntime:
    def __init__(self, spec: AppSpec, controller, freq_hz: float):
        self.spec = spec
        self.controller = controller
        self.freq_hz = freq_hz
        # Staggered initial progress keeps threads out of phase, so the
        # merged beat stream is near-uniform and the window estimator
        # tracks the true aggregate rate instead of the burst pattern
        # that perfectly synchronized threads would produce.
        self.threads = [
            ThreadState(
                spec.app_id, tid, None, spec.iterations_for_thread(tid),
                progress=tid / spec.thread_count,
            )
            for tid in range(spec.thread_count)
        ]
        self.log = HeartbeatLog(window_size=spec.effective_window())
        self.finished = False
        self.completion_time: float | None = None
        self.energy_j = 0.0
        self.migrations = 0
        self.first_entry_epoch: int | None = None
        self.in_range_epochs = 0
        self.measured_epochs = 0

    def active_threads(self) -> list[ThreadState]:
        return [t for t in self.threads if t.active]


def _build_controller(cfg: SimConfig, spec: AppSpec):
    params = cfg.policy_params
    if cfg.policy == "qos":
        target = qos.TargetRange.from_hard(
            spec.hard_target[0],
            spec.hard_target[1],
            params.get("proximity_fraction", 0.10),
        )
        ps = qos.PolicyState(
            target=target,
            macro_step_hz=params.get("macro_step_hz", 0.5e9),
            micro_step_hz=params.get("micro_step_hz", 0.1e9),
            overshoot_limit=params.get("overshoot_limit", 5),
            ratio_tolerance=params.get("ratio_tolerance", 0.02),
        )
        return qos.QosController(ps, cfg.table)
    if cfg.policy == "hpm":
        pid = baselines.PidState(
            kp=params.get("kp", 1.0e5),
            ki=params.get("ki", 2.0e6),
            kd=params.get("kd", 0.0),
            setpoint=(spec.hard_target[0] + spec.hard_target[1]) / 2,
            integral_clamp_hz=params.get("integral_clamp_hz", 3.0e9),
        )
        return baselines.HpmController(pid, cfg.table)
    if cfg.policy == "greedy":
        return baselines.GreedyController(cfg.table)
    if cfg.policy == "fixed":
        return baselines.FixedController()
    raise ValueError(f"unknown policy {cfg.policy!r}")


def initial_placement(cfg: SimConfig) -> list[list[CoreId]]:
    """Per app (in config order) the cores its threads start on."""
    occupied: set[CoreId] = set()
    out = []
    for spec in cfg.apps:
        ranked = rank_free_cores(cfg.floorplan, occupied, cfg.placement)
        chosen = ranked[: spec.thread_count]
        occupied.update(chosen)
        out.append(chosen)
    return out


def _plan_migration(rt: _AppRuntime, direction: str, occupied: set[CoreId], fp: Floorplan):
    """Pick (thread, src, dest) for a strictly improving migration, else None.

    Toward center: the thread on the highest-AMD core moves to the
    lowest-AMD free core. Away: the thread on the lowest-AMD core moves
    to the highest-AMD free core. Ties break by row-major core index.
    """
    candidates = [t for t in rt.active_threads() if t.core is not None]
    if not candidates:
        return None
    if direction == "toward_center":
        src = min(candidates, key=lambda t: (-amd(t.core, fp), fp.core_index(t.core)))
    else:
        src = min(candidates, key=lambda t: (amd(t.core, fp), fp.core_index(t.core)))
    ranked = rank_free_cores(fp, occupied, direction)
    if not ranked:
        return None
    dest = ranked[0]
    if direction == "toward_center" and amd(dest, fp) < amd(src.core, fp):
        return src, src.core, dest
    if direction == "away_from_center" and amd(dest, fp) > amd(src.core, fp):
        return src, src.core, dest
    return None


def _core_str(core: CoreId | None) -> str:
    return "" if core is None else f"{core.x}:{core.y}"


def run(cfg: SimConfig) -> SimResult:
    cfg.validate()
    fp = cfg.floorplan
    table = cfg.table
    dt = cfg.epoch_length_s
    freq0 = table.snap_hz(cfg.initial_freq_hz if cfg.initial_freq_hz is not None else table.midpoint_hz)

    runtimes = [_AppRuntime(spec, _build_controller(cfg, spec), freq0) for spec in cfg.apps]
    for rt, cores in zip(runtimes, initial_placement(cfg)):
        for thread, core in zip(rt.threads, cores):
            thread.core = core
    occupied = {t.core for rt in runtimes for t in rt.threads}

    rows: list[TraceRow] = []
    total_energy = 0.0
    epoch = 0
    while any(not rt.finished for rt in runtimes):
        t0 = epoch * dt
        if cfg.max_sim_time_s is not None and t0 >= cfg.max_sim_time_s - 1e-12:
            break

        # power from the state at the epoch's left edge (frequency and
        # occupancy are constant within an epoch)
        busy_total = 0
        app_power = {}
        for rt in runtimes:
            n_busy = len(rt.active_threads())
            busy_total += n_busy
            app_power[rt.spec.app_id] = n_busy * core_power(
                table.point_at(rt.freq_hz), cfg.power, busy=True
            )
        chip_power = sum(app_power.values()) + cfg.power.idle_w * (fp.core_count - busy_total)

        # advance threads and collect this epoch's heartbeats
        active_at_start = [rt for rt in runtimes if not rt.finished]
        for rt in active_at_start:
            beats = []
            for thread in rt.threads:
                beats.extend(advance_thread(thread, rt.spec, dt, rt.freq_hz, fp, t0))
            beats.sort()
            rt.log.extend(beats)
            if not any(t.active for t in rt.threads):
                rt.finished = True
                rt.completion_time = max(t for t, _ in beats)
                for thread in rt.threads:
                    occupied.discard(thread.core)
                    thread.core = None

        total_energy += chip_power * dt
        t_end = t0 + dt

        # measure, account, and build this epoch's rows
        epoch_rows = {}
        for rt in runtimes:
            app_id = rt.spec.app_id
            rt.energy_j += app_power[app_id] * dt
            if rt in active_at_start:
                hr = heart_rate(rt.log, t_end)
                if hr is not None:
                    lo, hi = rt.spec.hard_target
                    in_range = lo <= hr <= hi
                    if rt.first_entry_epoch is None and in_range:
                        rt.first_entry_epoch = epoch
                    if rt.first_entry_epoch is not None:
                        rt.measured_epochs += 1
                        if in_range:
                            rt.in_range_epochs += 1
                state, note = "", ""
            else:
                hr, state, note = None, "done", "finished"
            row = TraceRow(
                epoch=epoch, time_s=t0, app_id=app_id, hr=hr, state=state,
                freq_hz=rt.freq_hz, hard_min=rt.spec.hard_target[0],
                hard_max=rt.spec.hard_target[1], soft_min=None, soft_max=None,
                action="none", note=note, macro_step_hz=None,
                micro_step_hz=None, r_hr=None, r_p=None, migrated_thread=None,
                migrate_from="", migrate_to="", app_power_w=app_power[app_id],
                chip_power_w=chip_power, chip_energy_j=total_energy,
            )
            epoch_rows[app_id] = row
            rows.append(row)

        # policy decisions, applied now so they take effect next epoch
        for rt in active_at_start:
            row = epoch_rows[rt.spec.app_id]
            if rt.finished:
                row.state, row.note = "done", "finished"
                continue
            plan_in = _plan_migration(rt, "toward_center", occupied, fp)
            plan_out = _plan_migration(rt, "away_from_center", occupied, fp)
            obs = Observation(
                app_id=rt.spec.app_id, epoch=epoch, dt_s=dt, hr=row.hr,
                app_power_w=app_power[rt.spec.app_id], freq_hz=rt.freq_hz,
                freq_at_max=rt.freq_hz == table.max_hz,
                freq_at_min=rt.freq_hz == table.min_hz,
                can_migrate_in=plan_in is not None,
                can_migrate_out=plan_out is not None,
            )
            decision = rt.controller.decide(obs)
            applied = []
            for action in decision.actions:
                if isinstance(action, SetFrequency):
                    rt.freq_hz = table.snap_hz(action.freq_hz)
                    applied.append("set_frequency")
                elif isinstance(action, MigrateTowardCenter):
                    applied.append(_commit_migration(rt, plan_in, "migrate_in", row, occupied, epoch, cfg))
                elif isinstance(action, MigrateAwayFromCenter):
                    applied.append(_commit_migration(rt, plan_out, "migrate_out", row, occupied, epoch, cfg))
                elif isinstance(action, Hold):
                    applied.append("hold")
            row.action = "+".join(applied) if applied else "none"
            row.state = decision.state
            row.note = decision.note
            row.macro_step_hz = decision.macro_step_hz
            row.micro_step_hz = decision.micro_step_hz
            row.soft_min = decision.soft_min
            row.soft_max = decision.soft_max
            row.r_hr = decision.r_hr
            row.r_p = decision.r_p
        epoch += 1

    return SimResult(rows, _summarize(cfg, runtimes, epoch, total_energy))


def _commit_migration(rt, plan, kind, row, occupied, epoch, cfg) -> str:
    if plan is None:
        return f"{kind}_unavailable"
    thread, src, dest = plan
    thread.core = dest
    thread.stall_until = (epoch + 1) * cfg.epoch_length_s + cfg.migration_penalty_s
    occupied.discard(src)
    occupied.add(dest)
    rt.migrations += 1
    row.migrated_thread = thread.thread_id
    row.migrate_from = _core_str(src)
    row.migrate_to = _core_str(dest)
    return kind


def _summarize(cfg: SimConfig, runtimes: list[_AppRuntime], epochs: int, total_energy: float) -> dict:
    apps = []
    for rt in runtimes:
        residency = (
            rt.in_range_epochs / rt.measured_epochs if rt.measured_epochs else None
        )
        apps.append(
            {
                "app_id": rt.spec.app_id,
                "thread_count": rt.spec.thread_count,
                "hard_min": rt.spec.hard_target[0],
                "hard_max": rt.spec.hard_target[1],
                "finished": rt.finished,
                "completion_time_s": rt.completion_time,
                "energy_j": rt.energy_j,
                "migrations": rt.migrations,
                "first_entry_epoch": rt.first_entry_epoch,
                "in_range_epochs": rt.in_range_epochs,
                "measured_epochs": rt.measured_epochs,
                "residency": residency,
            }
        )
    return {
        "schema": "snucaqos-summary-v1",
        "label": cfg.label,
        "policy": cfg.policy,
        "seed": cfg.seed,
        "epoch_length_s": cfg.epoch_length_s,
        "epochs": epochs,
        "sim_time_s": epochs * cfg.epoch_length_s,
        "total_energy_j": total_energy,
        "apps": apps,
    }
