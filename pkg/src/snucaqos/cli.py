"""Command-line front door.

`snuca-qos run` executes one experiment (from an explicit JSON config or
a generated preset scenario) and writes trace.csv, summary.json and the
resolved config.json into the output directory. `snuca-qos compare`
tabulates summaries of different policies over the same scenarios.

Exit codes: 0 success, 2 configuration/validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, report, scenario
from .config import ConfigError, config_to_dict, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snuca-qos",
        description="Heartbeat-driven QoS scheduling simulator for S-NUCA many-cores",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one or more simulations")
    src = runp.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON experiment config")
    src.add_argument("--preset", choices=scenario.PRESET_NAMES,
                     help="generate a scenario from a workload preset")
    runp.add_argument("--threads", type=int, default=4,
                      help="thread count for --preset scenarios (default 4)")
    runp.add_argument("--epochs", type=int, default=300,
                      help="simulated epochs for --preset scenarios (default 300)")
    runp.add_argument("--policy", choices=engine.POLICIES,
                      help="override the configured policy")
    runp.add_argument("--seed", type=int, help="override the scenario seed")
    runp.add_argument("--out", default="out", help="output directory (default ./out)")
    runp.add_argument("--batch", type=int, default=1,
                      help="run N seeded scenarios into per-scenario subdirectories")

    cmpp = sub.add_parser("compare", help="compare summaries across policies")
    cmpp.add_argument("summaries", nargs="+", help="summary.json paths (>= 2)")
    return parser


def _make_config(args, seed: int) -> engine.SimConfig:
    if args.config:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = seed
        if args.policy and args.policy != cfg.policy:
            cfg.policy = args.policy
            cfg.policy_params = {}  # old params belong to the old policy
        return cfg
    try:
        return scenario.build_scenario(
            args.preset,
            args.threads,
            seed,
            policy=args.policy or "qos",
            epochs=args.epochs,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _echo_summary(summary: dict) -> None:
    parts = [
        f"label={summary['label'] or '-'}",
        f"policy={summary['policy']}",
        f"seed={summary['seed']}",
        f"epochs={summary['epochs']}",
        f"energy={summary['total_energy_j']:.6f}J",
    ]
    for app in summary["apps"]:
        res = "-" if app["residency"] is None else f"{app['residency']:.1%}"
        done = f"{app['completion_time_s']:.4f}s" if app["finished"] else "unfinished"
        parts.append(f"{app['app_id']}(residency={res},completion={done})")
    print(" ".join(parts))


def _cmd_run(args) -> int:
    if args.batch < 1:
        raise ConfigError("'--batch' must be >= 1")
    if args.config and args.batch > 1 and args.seed is None:
        raise ConfigError("'--batch' with --config also needs --seed to vary anything")
    base_seed = args.seed if args.seed is not None else 0
    out_root = Path(args.out)
    for i in range(args.batch):
        seed = base_seed + i
        cfg = _make_config(args, seed)
        out_dir = out_root / f"scenario-{seed}" if args.batch > 1 else out_root
        out_dir.mkdir(parents=True, exist_ok=True)
        result = engine.run(cfg)
        report.write_trace(result.rows, out_dir / "trace.csv")
        report.write_summary(result.summary, out_dir / "summary.json")
        with open(out_dir / "config.json", "w") as f:
            json.dump(config_to_dict(cfg), f, indent=2)
            f.write("\n")
        _echo_summary(result.summary)
    return EXIT_OK


def _cmd_compare(args) -> int:
    summaries = [report.load_summary(p) for p in args.summaries]
    result = report.compare(summaries)
    print(report.format_compare(result))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_compare(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
