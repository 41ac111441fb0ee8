"""Command-line entry point.

Subcommands: run a scenario, compare it along an axis (policy, mode, or
cluster size), fit a calibration profile, or just validate a scenario file.
Every failure exits nonzero with a single `error: ...` diagnostic line.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .calibrate import InfeasibleCalibration, load_targets, run_grid
from .engine import DeadlockError, Scenario, ScenarioInvalid, SchedulingMode, run_scenario
from .metrics import EmptyRun
from .placement import PlacementPolicy
from .profiles import ProfileFormatError, ProfileNotFound, save_profile
from .reporting import CompareRow, render_compare_csv, render_summary, write_run_outputs
from .scenario_io import ParseError, SchemaError, ValidationError, load_scenario

_USER_ERRORS = (
    ParseError,
    SchemaError,
    ValidationError,
    ScenarioInvalid,
    DeadlockError,
    ProfileNotFound,
    ProfileFormatError,
    EmptyRun,
    OSError,
)

COMPARE_AXES = ("policy", "mode", "cluster_size")


def _fail(message: str, code: int = 1) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _scenario_variant(scenario: Scenario, axis: str, value: str) -> Scenario:
    if axis == "policy":
        return replace(scenario, policy=PlacementPolicy.parse(value))
    if axis == "mode":
        return replace(scenario, mode=SchedulingMode.parse(value))
    if axis == "cluster_size":
        workers = int(value)
        if workers < 1:
            raise ValueError("cluster_size values must be >= 1")
        return replace(scenario, cluster=replace(scenario.cluster, workers=workers))
    raise ValueError(f"unknown axis: {axis}")


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    report = run_scenario(scenario)
    written = write_run_outputs(report, Path(args.out))
    sys.stdout.write(render_summary(report))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ValidationError("no values given for comparison")
    rows = []
    for value in values:
        variant = _scenario_variant(scenario, args.axis, value)
        rows.append(CompareRow(axis=args.axis, value=value, report=run_scenario(variant)))
    text = render_compare_csv(rows)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "compare.csv"
    path.write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    print(f"wrote {path}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    targets = load_targets(args.targets)
    out_path = Path(args.out)
    name = out_path.stem
    try:
        profile, achieved, residuals = run_grid(targets, name)
    except InfeasibleCalibration as exc:
        print("error: infeasible calibration; best residuals (in tolerances):",
              file=sys.stderr)
        for key, value in exc.residuals.items():
            print(f"error:   {key}: {value:.3f}", file=sys.stderr)
        return 2
    save_profile(profile, out_path)
    for key in sorted(achieved):
        print(f"{key}: achieved {achieved[key]:.4f} "
              f"(target {targets[key].target} +/- {targets[key].tol})")
    print(f"wrote {out_path}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    print(
        f"ok: {len(scenario.jobs)} job(s) on {scenario.cluster.workers} node(s), "
        f"policy={scenario.policy.value}, mode={scenario.mode.value}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scylla-sim",
        description="Discrete-event simulator of offer-based gang scheduling "
                    "for containerized MPI jobs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write CSV outputs")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run a scenario once per axis value")
    p_cmp.add_argument("scenario", help="scenario JSON file")
    p_cmp.add_argument("--axis", required=True, choices=COMPARE_AXES)
    p_cmp.add_argument("--values", required=True, help="comma-separated axis values")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_cal = sub.add_parser("calibrate", help="grid-search a calibration profile")
    p_cal.add_argument("targets", help="targets JSON file")
    p_cal.add_argument("--out", required=True, help="output profile path")
    p_cal.set_defaults(func=cmd_calibrate)

    p_val = sub.add_parser("validate", help="load and check a scenario file")
    p_val.add_argument("scenario", help="scenario JSON file")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
