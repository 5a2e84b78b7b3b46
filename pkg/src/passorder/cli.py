"""Command line front end: sweeps, golden checks, single runs, exports."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from .experiments import ScenarioSpec, run_golden, run_sweep
from .fleets import example_fleet, random_fleet
from .geometry import build_conflict_sets
from .graphs import build_cdg, build_cug
from .simulation import (
    ArrivalModel,
    SafetyViolationError,
    SimConfig,
    simulate,
)

OUT_DIR_ENV = "PASSORDER_OUT"


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _sim_config(config: dict) -> SimConfig:
    overrides = config.get("sim", {})
    valid = {f.name for f in dataclass_fields(SimConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValueError(f"unknown sim config fields: {sorted(unknown)}")
    return SimConfig(**overrides)


def _seeds_from(value: str | None, config: dict) -> tuple[int, ...]:
    if value is not None:
        parts = _int_list(value)
        # A single number is a seed count; a list is taken verbatim.
        return tuple(range(parts[0])) if len(parts) == 1 else parts
    raw = config.get("seeds", 5)
    if isinstance(raw, int):
        return tuple(range(raw))
    return tuple(int(s) for s in raw)


def _resolve_out(flag_value: str | None, config: dict, default: str) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    return Path(config.get("out", default))


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    spec = ScenarioSpec(
        probability=args.p if args.p is not None else config.get("p", 0.3),
        n_values=_int_list(args.n) if args.n else tuple(config.get("n", [84])),
        schedulers=(
            tuple(args.scheduler.split(","))
            if args.scheduler
            else tuple(config.get("schedulers", ["dfst", "opt_dfst", "mm"]))
        ),
        seeds=_seeds_from(args.seeds, config),
        sim=_sim_config(config),
        out_dir=_resolve_out(args.out, config, "results"),
        measure_runtime=not args.no_runtime,
    )
    try:
        result = run_sweep(spec)
    except SafetyViolationError as exc:
        print(f"safety audit failed: {exc}", file=sys.stderr)
        return 1
    print(result.to_csv(), end="")
    for key in sorted(result.aggregates):
        print(f"# {key} = {result.aggregates[key]}")
    print(f"# wrote {spec.out_dir}/sweep.csv and aggregates.json")
    return 0


def _cmd_golden(args: argparse.Namespace) -> int:
    report = run_golden("example1", corrupt=args.corrupt)
    print(report.to_text(), end="")
    return 0 if report.passed else 1


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    sim = _sim_config(config)
    trajectory = None
    if args.trajectory:
        Path(args.trajectory).parent.mkdir(parents=True, exist_ok=True)
        trajectory = open(args.trajectory, "w")
    try:
        if args.example1:
            metrics = simulate(
                args.scheduler,
                fleet=example_fleet(),
                config=sim,
                trajectory=trajectory,
            )
        else:
            arrivals = ArrivalModel(
                probability=args.p, seed=args.seed, n_total=args.n
            )
            metrics = simulate(
                args.scheduler,
                arrivals=arrivals,
                config=sim,
                trajectory=trajectory,
            )
    except SafetyViolationError as exc:
        print(f"safety audit failed: {exc}", file=sys.stderr)
        return 1
    finally:
        if trajectory is not None:
            trajectory.close()
    payload = json.dumps(metrics.to_flat_dict(), indent=2, sort_keys=True)
    if args.json:
        Path(args.json).parent.mkdir(parents=True, exist_ok=True)
        Path(args.json).write_text(payload + "\n")
    print(payload)
    return 0


def _cmd_export_graphs(args: argparse.Namespace) -> int:
    if args.example1:
        fleet = example_fleet()
    else:
        rng = np.random.default_rng(args.seed)
        fleet = random_fleet(rng, args.n)
    sets = build_conflict_sets(fleet)
    cdg = build_cdg(sets, len(fleet))
    cug = build_cug(cdg)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "cdg.txt").write_text(cdg.to_text())
        (out / "cug.txt").write_text(cug.to_text())
        print(f"wrote {out}/cdg.txt and {out}/cug.txt")
    else:
        print(cdg.to_text(), end="")
        print(cug.to_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passorder",
        description=(
            "Conflict-free intersection passing orders: scheduling sweeps, "
            "golden checks, single simulations, and graph exports."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a seeded Monte-Carlo sweep")
    sweep.add_argument("--config", help="JSON scenario file")
    sweep.add_argument("--p", type=float, help="per-lane arrival probability")
    sweep.add_argument("--n", help="comma-separated vehicle counts")
    sweep.add_argument(
        "--seeds", help="seed count (single number) or comma-separated seeds"
    )
    sweep.add_argument("--scheduler", help="comma-separated scheduler names")
    sweep.add_argument("--out", help=f"output directory (or ${OUT_DIR_ENV})")
    sweep.add_argument(
        "--no-runtime",
        action="store_true",
        help="write runtime_ms as 0 for byte-stable output",
    )
    sweep.set_defaults(func=_cmd_sweep)

    golden = sub.add_parser("golden", help="check the embedded example")
    golden.add_argument(
        "--corrupt",
        action="store_true",
        help="negative control: corrupt one expectation",
    )
    golden.set_defaults(func=_cmd_golden)

    single = sub.add_parser("simulate", help="run one simulation")
    single.add_argument("--scheduler", default="mm",
                        choices=["dfst", "opt_dfst", "mm"])
    single.add_argument("--n", type=int, default=84)
    single.add_argument("--p", type=float, default=0.3)
    single.add_argument("--seed", type=int, default=0)
    single.add_argument("--example1", action="store_true",
                        help="simulate the embedded six-vehicle example")
    single.add_argument("--config", help="JSON file with a sim section")
    single.add_argument("--trajectory", help="write a trajectory CSV here")
    single.add_argument("--json", help="write the metrics JSON here")
    single.set_defaults(func=_cmd_simulate)

    export = sub.add_parser(
        "export-graphs", help="dump conflict graphs in exchange format"
    )
    export.add_argument("--example1", action="store_true")
    export.add_argument("--n", type=int, default=12)
    export.add_argument("--seed", type=int, default=0)
    export.add_argument("--out", help="directory for cdg.txt / cug.txt")
    export.set_defaults(func=_cmd_export_graphs)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
