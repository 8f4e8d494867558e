"""Command-line front end: run, optimize, table, compare.

run      simulate a scenario with one controller and write a per-frame CSV
         (one row per replication and frame, then per-frame mean rows with
         rep = "mean"); *_num columns evaluate the analytic model at the
         frame's true contender count, *_sim columns are realized.
optimize print the utility-maximizing subframe count for one load.
table    write the offline load -> n_s lookup table and a dense sweep.
compare  run several controllers on common random numbers, write a merged
         per-frame CSV and print aggregate utilities, pairwise improvement
         percentages, and per-frame win fractions.

Numbers are written in their shortest round-trippable decimal form, so a
repeated invocation with the same scenario and seed produces a
byte-identical file. Exit codes: 0 ok, 2 argument or scenario problems,
3 runtime or model failures.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import RachConfig, throughput, utility_of_load
from .optimizer import optimal_subframes_integer, subframe_lookup_table
from .scenario import ScenarioError, parse_scenario
from .simulator import (
    ControllerKind,
    ReplicationSet,
    Scenario,
    run_replications,
)

__all__ = ["main", "ComparisonReport", "build_report"]

RUN_COLUMNS = [
    "rep",
    "frame",
    "controller",
    "n_s",
    "arrivals",
    "contenders",
    "successes",
    "collided_devices",
    "idle",
    "est_load",
    "true_load",
    "throughput_sim",
    "throughput_num",
    "utility_sim",
    "utility_num",
]

COMPARE_COLUMNS = [
    "controller",
    "frame",
    "arrivals",
    "n_s",
    "contenders",
    "true_load",
    "est_load",
    "successes",
    "utility_sim",
    "utility_num",
    "ci95_utility_sim",
]

_KIND_NAMES = sorted(k.value for k in ControllerKind)


def _fmt(value) -> str:
    """Shortest round-trippable cell text; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    f = float(value)
    if math.isnan(f):
        return ""
    return repr(f)


def _open_writer(path: Path):
    handle = path.open("w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def write_run_csv(
    path: Path, repset: ReplicationSet, controller_name: str, config: RachConfig
) -> None:
    """Per-replication rows followed by per-frame mean rows."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(RUN_COLUMNS)
        for run in repset.runs:
            for row in run.rows:
                row.validate(config)
                writer.writerow(
                    [
                        _fmt(run.replication_id),
                        _fmt(row.frame),
                        controller_name,
                        _fmt(row.n_s_used),
                        _fmt(row.arrivals),
                        _fmt(row.contenders),
                        _fmt(row.successes),
                        _fmt(row.collided_devices),
                        _fmt(row.idle),
                        _fmt(row.est_load),
                        _fmt(row.true_load),
                        _fmt(row.throughput),
                        _fmt(throughput(row.true_load, row.n_s_used, config.n_preambles)),
                        _fmt(row.utility),
                        _fmt(utility_of_load(row.true_load, row.n_s_used, config)),
                    ]
                )
        num_means = _numeric_column_means(repset, config)
        means = repset.means
        for frame in range(repset.n_frames):
            writer.writerow(
                [
                    "mean",
                    _fmt(frame),
                    controller_name,
                    _fmt(means["n_s_used"][frame]),
                    _fmt(means["arrivals"][frame]),
                    _fmt(means["contenders"][frame]),
                    _fmt(means["successes"][frame]),
                    _fmt(means["collided_devices"][frame]),
                    _fmt(means["idle"][frame]),
                    _fmt(means["est_load"][frame]),
                    _fmt(means["true_load"][frame]),
                    _fmt(means["throughput"][frame]),
                    _fmt(num_means["throughput_num"][frame]),
                    _fmt(means["utility"][frame]),
                    _fmt(num_means["utility_num"][frame]),
                ]
            )


def _numeric_column_means(repset: ReplicationSet, config: RachConfig) -> dict[str, np.ndarray]:
    """Per-frame means of the analytic columns evaluated at true loads."""
    tp = np.array(
        [
            [
                throughput(row.true_load, row.n_s_used, config.n_preambles)
                for row in run.rows
            ]
            for run in repset.runs
        ]
    )
    ut = np.array(
        [
            [utility_of_load(row.true_load, row.n_s_used, config) for row in run.rows]
            for run in repset.runs
        ]
    )
    return {"throughput_num": tp.mean(axis=0), "utility_num": ut.mean(axis=0)}


@dataclass
class ComparisonReport:
    """Aggregate utilities and pairwise comparisons across controllers.

    improvement_pct[(a, b)] = 100 * (U_a - U_b) / |U_b| on utilities summed
    over frames (per-frame means first); win_fraction[(a, b)] is the share
    of frames where a's mean utility is at least b's.
    """

    aggregate_utility: dict[str, float]
    improvement_pct: dict[tuple[str, str], float]
    win_fraction: dict[tuple[str, str], float]


def build_report(repsets: dict[str, ReplicationSet]) -> ComparisonReport:
    aggregate = {
        name: float(np.sum(rs.means["utility"])) for name, rs in repsets.items()
    }
    improvement: dict[tuple[str, str], float] = {}
    wins: dict[tuple[str, str], float] = {}
    names = list(repsets)
    if len(names) == 1:
        # comparing a controller against itself on common seeds
        name = names[0]
        improvement[(name, name)] = 0.0
        wins[(name, name)] = 1.0
        return ComparisonReport(aggregate, improvement, wins)
    for a in names:
        for b in names:
            if a == b:
                continue
            ua, ub = aggregate[a], aggregate[b]
            if ua == ub:
                improvement[(a, b)] = 0.0
            elif ub == 0.0:
                improvement[(a, b)] = math.inf if ua > ub else -math.inf
            else:
                improvement[(a, b)] = 100.0 * (ua - ub) / abs(ub)
            wins[(a, b)] = float(
                np.mean(repsets[a].means["utility"] >= repsets[b].means["utility"])
            )
    return ComparisonReport(aggregate, improvement, wins)


def write_compare_csv(
    path: Path, repsets: dict[str, ReplicationSet], config: RachConfig
) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(COMPARE_COLUMNS)
        for name, repset in repsets.items():
            num_means = _numeric_column_means(repset, config)
            means = repset.means
            for frame in range(repset.n_frames):
                writer.writerow(
                    [
                        name,
                        _fmt(frame),
                        _fmt(means["arrivals"][frame]),
                        _fmt(means["n_s_used"][frame]),
                        _fmt(means["contenders"][frame]),
                        _fmt(means["true_load"][frame]),
                        _fmt(means["est_load"][frame]),
                        _fmt(means["successes"][frame]),
                        _fmt(means["utility"][frame]),
                        _fmt(num_means["utility_num"][frame]),
                        _fmt(repset.ci95["utility"][frame]),
                    ]
                )


# ---------------------------------------------------------------------------
# Commands


def _scenario_for(args) -> Scenario:
    scenario = parse_scenario(args.scenario)
    if getattr(args, "controller", None):
        scenario = scenario.with_controller(ControllerKind(args.controller))
    return scenario


def cmd_run(args) -> int:
    scenario = _scenario_for(args)
    repset = run_replications(scenario, args.reps, args.seed)
    name = scenario.controller.kind.value
    write_run_csv(Path(args.out), repset, name, scenario.config)
    print(f"wrote {args.out}: {repset.n_reps} replications x {repset.n_frames} frames ({name})")
    return 0


def _config_from_args(args) -> RachConfig:
    # every failure here is a bad command-line value, an argument error
    try:
        return RachConfig(
            n_preambles=args.preambles,
            n_s_min=args.ns_min,
            n_s_max=args.ns_max,
            alpha=args.alpha,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def cmd_optimize(args) -> int:
    config = _config_from_args(args)
    if args.load < 0:
        raise ScenarioError(f"load must be >= 0, got {args.load}")
    decision = optimal_subframes_integer(args.load, config)
    print(f"n_s={decision.n_s} utility={_fmt(decision.achieved_utility)}")
    return 0


def cmd_table(args) -> int:
    config = _config_from_args(args)
    if args.step <= 0:
        raise ScenarioError(f"step must be > 0, got {args.step}")
    if args.max_load <= 0:
        raise ScenarioError(f"max-load must be > 0, got {args.max_load}")
    table = subframe_lookup_table(config, args.step, args.max_load)
    out = Path(args.out)
    handle, writer = _open_writer(out)
    with handle:
        writer.writerow(["load_threshold", "n_s"])
        for threshold, n_s in table.entries:
            writer.writerow([_fmt(threshold), _fmt(n_s)])
    sweep_path = Path(args.sweep_out) if args.sweep_out else out.with_name(
        out.stem + "_sweep" + (out.suffix or ".csv")
    )
    handle, writer = _open_writer(sweep_path)
    with handle:
        writer.writerow(["load", "n_s"])
        steps = int(math.floor(args.max_load / args.step + 1e-9))
        for i in range(steps + 1):
            load = i * args.step
            writer.writerow([_fmt(load), _fmt(table.lookup(load))])
    print(f"wrote {out} ({len(table.entries)} thresholds) and {sweep_path}")
    return 0


def cmd_compare(args) -> int:
    names = [c.strip() for c in args.controllers.split(",") if c.strip()]
    if len(names) < 2:
        raise ScenarioError("compare needs at least two controllers")
    for name in names:
        if name not in _KIND_NAMES:
            raise ScenarioError(
                f"unknown controller {name!r}; choose from {_KIND_NAMES}"
            )
    scenario = parse_scenario(args.scenario)
    repsets: dict[str, ReplicationSet] = {}
    for name in dict.fromkeys(names):  # run each distinct controller once
        variant = scenario.with_controller(ControllerKind(name))
        repsets[name] = run_replications(variant, args.reps, args.seed)
    write_compare_csv(Path(args.out), repsets, scenario.config)
    report = build_report(repsets)
    print("aggregate utility (sum of per-frame means):")
    for name in repsets:
        print(f"  {name}: {report.aggregate_utility[name]:.3f}")
    for (a, b), pct in report.improvement_pct.items():
        win = report.win_fraction[(a, b)]
        print(f"  {a} vs {b}: improvement {pct:+.1f}%, win fraction {win:.3f}")
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rachsim",
        description="RACH subframe allocation: simulate, optimize, tabulate, compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one controller, write per-frame CSV")
    run_p.add_argument("--scenario", required=True, help="scenario file path")
    run_p.add_argument("--controller", choices=_KIND_NAMES, help="override scenario controller")
    run_p.add_argument("--seed", type=int, default=1)
    run_p.add_argument("--reps", type=int, default=100)
    run_p.add_argument("--out", required=True, help="output CSV path")
    run_p.set_defaults(func=cmd_run)

    opt_p = sub.add_parser("optimize", help="best subframe count for one load")
    opt_p.add_argument("--load", type=float, required=True)
    opt_p.add_argument("--alpha", type=float, required=True)
    opt_p.add_argument("--preambles", type=int, default=64)
    opt_p.add_argument("--ns-min", type=int, default=2)
    opt_p.add_argument("--ns-max", type=int, default=8)
    opt_p.set_defaults(func=cmd_optimize)

    tab_p = sub.add_parser("table", help="emit the offline load -> n_s lookup table")
    tab_p.add_argument("--alpha", type=float, required=True)
    tab_p.add_argument("--preambles", type=int, default=64)
    tab_p.add_argument("--ns-min", type=int, default=2)
    tab_p.add_argument("--ns-max", type=int, default=8)
    tab_p.add_argument("--max-load", type=float, default=700.0)
    tab_p.add_argument("--step", type=float, default=1.0)
    tab_p.add_argument("--out", required=True, help="thresholds CSV path")
    tab_p.add_argument("--sweep-out", help="dense sweep CSV path (default: <out>_sweep)")
    tab_p.set_defaults(func=cmd_table)

    cmp_p = sub.add_parser("compare", help="run controllers on common random numbers")
    cmp_p.add_argument("--scenario", required=True)
    cmp_p.add_argument(
        "--controllers",
        required=True,
        help="comma-separated list from " + ", ".join(_KIND_NAMES),
    )
    cmp_p.add_argument("--seed", type=int, default=1)
    cmp_p.add_argument("--reps", type=int, default=100)
    cmp_p.add_argument("--out", required=True, help="merged per-frame CSV path")
    cmp_p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
