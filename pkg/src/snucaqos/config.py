"""Experiment configuration: JSON in, validated SimConfig out.

Every diagnostic names the offending key (section.key or apps[i].key)
so config mistakes are one-glance fixable. Unknown keys are rejected
rather than ignored; silent typos in experiment configs are worse than
a hard error.
"""

from __future__ import annotations

import json
from pathlib import Path

from .engine import SimConfig
from .power import DEFAULT_KAPPA, PowerParams, make_linear_table
from .topology import Floorplan
from .workload import AppSpec


class ConfigError(Exception):
    pass


_TOP_KEYS = {"floorplan", "power", "apps", "policy", "sim"}
_FLOORPLAN_KEYS = {"width", "height", "hop_latency_s", "bank_access_latency_s", "round_trip_factor"}
_POWER_KEYS = {
    "static_w", "idle_w", "kappa",
    "freq_min_hz", "freq_max_hz", "freq_step_hz", "voltage_min_v", "voltage_max_v",
}
_APP_KEYS = {
    "app_id", "thread_count", "compute_cycles_per_iteration",
    "llc_accesses_per_iteration", "total_iterations", "hard_target", "window_size",
}
_POLICY_KEYS = {
    "qos": {"name", "proximity_fraction", "macro_step_hz", "micro_step_hz", "overshoot_limit", "ratio_tolerance"},
    "hpm": {"name", "kp", "ki", "kd", "integral_clamp_hz"},
    "greedy": {"name"},
    "fixed": {"name"},
}
_SIM_KEYS = {
    "epoch_length_s", "migration_penalty_s", "max_sim_time_s", "seed",
    "placement", "initial_freq_hz", "label",
}


def _check_keys(section: str, data: dict, allowed: set) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{section}.{key}'")


def _number(section: str, data: dict, key: str, default):
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{section}.{key}' must be a number")
    return value


def _integer(section: str, data: dict, key: str, default):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{section}.{key}' must be an integer")
    return value


def _string(section: str, data: dict, key: str, default):
    value = data.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"'{section}.{key}' must be a string")
    return value


def _parse_app(i: int, data) -> AppSpec:
    section = f"apps[{i}]"
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be an object")
    _check_keys(section, data, _APP_KEYS)
    for key in ("app_id", "thread_count", "compute_cycles_per_iteration", "total_iterations", "hard_target"):
        if key not in data:
            raise ConfigError(f"missing key '{section}.{key}'")
    target = data["hard_target"]
    if not (isinstance(target, (list, tuple)) and len(target) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in target)):
        raise ConfigError(f"'{section}.hard_target' must be [min_hr, max_hr]")
    try:
        return AppSpec(
            app_id=_string(section, data, "app_id", None),
            thread_count=_integer(section, data, "thread_count", None),
            compute_cycles_per_iteration=_number(section, data, "compute_cycles_per_iteration", None),
            llc_accesses_per_iteration=_number(section, data, "llc_accesses_per_iteration", 0),
            total_iterations=_integer(section, data, "total_iterations", None),
            hard_target=(float(target[0]), float(target[1])),
            window_size=_integer(section, data, "window_size", 0),
        )
    except ValueError as e:
        raise ConfigError(f"{section}: {e}") from e


def parse_config(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys("config", data, _TOP_KEYS)

    fp_data = data.get("floorplan", {})
    _check_keys("floorplan", fp_data, _FLOORPLAN_KEYS)
    try:
        floorplan = Floorplan(
            width=_integer("floorplan", fp_data, "width", 8),
            height=_integer("floorplan", fp_data, "height", 8),
            hop_latency_s=_number("floorplan", fp_data, "hop_latency_s", 1.5e-9),
            bank_access_latency_s=_number("floorplan", fp_data, "bank_access_latency_s", 5e-9),
            round_trip_factor=_number("floorplan", fp_data, "round_trip_factor", 2.0),
        )
    except ValueError as e:
        raise ConfigError(f"floorplan: {e}") from e

    pw_data = data.get("power", {})
    _check_keys("power", pw_data, _POWER_KEYS)
    try:
        power = PowerParams(
            static_w=_number("power", pw_data, "static_w", 0.5),
            idle_w=_number("power", pw_data, "idle_w", 0.1),
            kappa=_number("power", pw_data, "kappa", DEFAULT_KAPPA),
        )
        table = make_linear_table(
            min_hz=_number("power", pw_data, "freq_min_hz", 1.0e9),
            max_hz=_number("power", pw_data, "freq_max_hz", 4.0e9),
            step_hz=_number("power", pw_data, "freq_step_hz", 0.1e9),
            voltage_min_v=_number("power", pw_data, "voltage_min_v", 0.8),
            voltage_max_v=_number("power", pw_data, "voltage_max_v", 1.2),
        )
    except ValueError as e:
        raise ConfigError(f"power: {e}") from e

    apps_data = data.get("apps", [])
    if not isinstance(apps_data, list):
        raise ConfigError("'apps' must be a list")
    apps = [_parse_app(i, a) for i, a in enumerate(apps_data)]

    pol_data = data.get("policy", {})
    if not isinstance(pol_data, dict):
        raise ConfigError("'policy' must be an object")
    name = _string("policy", pol_data, "name", "qos")
    if name not in _POLICY_KEYS:
        raise ConfigError(f"'policy.name' must be one of {'/'.join(sorted(_POLICY_KEYS))}, got {name!r}")
    _check_keys("policy", pol_data, _POLICY_KEYS[name])
    params = {k: v for k, v in pol_data.items() if k != "name"}
    for key, value in params.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'policy.{key}' must be a number")

    sim_data = data.get("sim", {})
    _check_keys("sim", sim_data, _SIM_KEYS)
    cfg = SimConfig(
        apps=apps,
        floorplan=floorplan,
        table=table,
        power=power,
        policy=name,
        policy_params=params,
        epoch_length_s=_number("sim", sim_data, "epoch_length_s", 1e-3),
        migration_penalty_s=_number("sim", sim_data, "migration_penalty_s", 5e-5),
        max_sim_time_s=_number("sim", sim_data, "max_sim_time_s", None),
        seed=_integer("sim", sim_data, "seed", 0),
        placement=_string("sim", sim_data, "placement", "toward_center"),
        initial_freq_hz=_number("sim", sim_data, "initial_freq_hz", None),
        label=_string("sim", sim_data, "label", ""),
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return cfg


def load_config(path: str | Path) -> SimConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from e
    return parse_config(data)


def config_to_dict(cfg: SimConfig) -> dict:
    """Resolved config as a JSON-serializable dict (for audit dumps)."""
    fp, pw, tb = cfg.floorplan, cfg.power, cfg.table
    return {
        "floorplan": {
            "width": fp.width,
            "height": fp.height,
            "hop_latency_s": fp.hop_latency_s,
            "bank_access_latency_s": fp.bank_access_latency_s,
            "round_trip_factor": fp.round_trip_factor,
        },
        "power": {
            "static_w": pw.static_w,
            "idle_w": pw.idle_w,
            "kappa": pw.kappa,
            "freq_min_hz": tb.min_hz,
            "freq_max_hz": tb.max_hz,
            "freq_step_hz": tb.grid_step_hz,
            "voltage_min_v": tb.points[0].voltage_v,
            "voltage_max_v": tb.points[-1].voltage_v,
        },
        "apps": [
            {
                "app_id": a.app_id,
                "thread_count": a.thread_count,
                "compute_cycles_per_iteration": a.compute_cycles_per_iteration,
                "llc_accesses_per_iteration": a.llc_accesses_per_iteration,
                "total_iterations": a.total_iterations,
                "hard_target": list(a.hard_target),
                "window_size": a.window_size,
            }
            for a in cfg.apps
        ],
        "policy": {"name": cfg.policy, **cfg.policy_params},
        "sim": {
            "epoch_length_s": cfg.epoch_length_s,
            "migration_penalty_s": cfg.migration_penalty_s,
            "max_sim_time_s": cfg.max_sim_time_s,
            "seed": cfg.seed,
            "placement": cfg.placement,
            "initial_freq_hz": cfg.initial_freq_hz,
            "label": cfg.label,
        },
    }
