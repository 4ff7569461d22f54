"""Command line interface.

Subcommands: validate, analyze, optimize, sweep, render. Every command
takes --scenario; overrides are applied to the in-memory scenario and
re-validated before any computation. Exit codes: 0 success, 1 failed
validation, 2 parse/schema/usage/IO trouble, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .body_model import Vec2, com_velocity, nonarm_com
from .errors import (
    DegenerateVelocity,
    IllConditioned,
    IndexOutOfRange,
    NoFeasiblePoint,
    ParseError,
    SchemaError,
    SingularChain,
    ValidationError,
    ZeroTorque,
)
from .placement_opt import JointLimits, optimize_placement
from .reporting import render_landscape, render_scene
from .scenario_io import (
    Scenario,
    make_context,
    read_scenario_file,
    validate_scenario,
    write_landscape_csv,
    write_placement_report,
)

_NUMERIC_ERRORS = (
    DegenerateVelocity, SingularChain, IllConditioned,
    ZeroTorque, NoFeasiblePoint, IndexOutOfRange,
)


def _g(x: float) -> str:
    return f"{x:.9g}"


def _fail(code: str, exc: BaseException, status: int) -> int:
    message = " | ".join(str(exc).splitlines()) or exc.__class__.__name__
    print(f"error[{code}]: {message}", file=sys.stderr)
    return status


def _csv_floats(text: str, n: int, flag: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{flag} needs {n} comma-separated numbers")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{flag}: {exc}") from exc


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", required=True, help="scenario JSON file")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("-v", "--verbose", action="store_true",
                     help="print validation warnings and extra progress")


def _add_overrides(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--grid-step-deg", type=float, default=None,
                     help="override the grid step, degrees")
    sub.add_argument("--a", type=float, default=None,
                     help="override the elbow-angle penalty weight")
    sub.add_argument("--force-model", choices=("expanded", "lsq"), default=None,
                     help="override the force model")
    sub.add_argument("--tau", default=None, metavar="T5,T6,T7",
                     help="override torque magnitudes, newton meters")
    sub.add_argument("--limits-deg", default=None, metavar="T5MIN,T5MAX,T6MIN,T6MAX",
                     help="override joint limits, degrees")
    sub.add_argument("--constrained", action="store_true",
                     help="exclude robot-infeasible handle positions from the search")
    sub.add_argument("--robot-base", default=None, metavar="X,Y",
                     help="fixed robot base point for the reach check, meters")


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    obj = scenario.objective
    if getattr(args, "grid_step_deg", None) is not None:
        obj = replace(obj, grid_step=math.radians(args.grid_step_deg))
    if getattr(args, "a", None) is not None:
        obj = replace(obj, a=args.a)
    if getattr(args, "force_model", None) is not None:
        obj = replace(obj, force_model=args.force_model)
    if getattr(args, "tau", None) is not None:
        t = _csv_floats(args.tau, 3, "--tau")
        obj = replace(obj, torque_magnitudes=(t[0], t[1], t[2]))
    limits = scenario.limits
    if getattr(args, "limits_deg", None) is not None:
        v = _csv_floats(args.limits_deg, 4, "--limits-deg")
        limits = JointLimits(*(math.radians(x) for x in v))
    return replace(scenario, objective=obj, limits=limits)


def _robot_base(args: argparse.Namespace) -> Vec2 | None:
    raw = getattr(args, "robot_base", None)
    if raw is None:
        return None
    x, y = _csv_floats(raw, 2, "--robot-base")
    return Vec2(x, y)


def _load(args: argparse.Namespace) -> Scenario:
    """Parse, apply overrides, validate; raises on any error finding."""
    scenario = _apply_overrides(read_scenario_file(args.scenario), args)
    findings = validate_scenario(scenario)
    errors = [f for f in findings if f.is_error]
    if getattr(args, "verbose", False):
        for f in findings:
            if not f.is_error:
                print(f"warning[{f.code}]: {f.message}", file=sys.stderr)
    if errors:
        raise ValidationError("; ".join(f"{f.code}: {f.message}" for f in errors))
    return scenario


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = _apply_overrides(read_scenario_file(args.scenario), args)
    findings = validate_scenario(scenario)
    for f in findings:
        stream = sys.stderr if f.is_error else sys.stdout
        print(f"{f.level}[{f.code}]: {f.message}", file=stream)
    errors = sum(1 for f in findings if f.is_error)
    warnings = len(findings) - errors
    print(f"{scenario.name}: {errors} error(s), {warnings} warning(s)")
    return 1 if errors else 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    scenario = _load(args)
    rows = []
    for i, frame in enumerate(scenario.frames):
        com = nonarm_com(frame.pose, scenario.segments)
        try:
            state = com_velocity(scenario.frames, scenario.segments, i)
        except (IndexOutOfRange, DegenerateVelocity):
            state = None
        rows.append((i, frame.time, com, state))

    print(f"{'frame':>5} {'time_s':>9} {'com_x_m':>12} {'com_y_m':>12} "
          f"{'speed_mps':>12} {'dir_x':>9} {'dir_y':>9}")
    for i, t, com, state in rows:
        mark = " *" if i == scenario.max_effort_index else ""
        if state is None:
            print(f"{i:>5} {_g(t):>9} {_g(com.x):>12} {_g(com.y):>12} "
                  f"{'-':>12} {'-':>9} {'-':>9}{mark}")
        else:
            print(f"{i:>5} {_g(t):>9} {_g(com.x):>12} {_g(com.y):>12} "
                  f"{_g(state.speed):>12} {_g(state.direction.x):>9} "
                  f"{_g(state.direction.y):>9}{mark}")
    print("* max-effort frame")

    if args.out is not None:
        out = _out_dir(args)
        lines = ["frame,time_s,com_x_m,com_y_m,speed_mps,dir_x,dir_y"]
        for i, t, com, state in rows:
            if state is None:
                lines.append(f"{i},{t!r},{com.x!r},{com.y!r},,,")
            else:
                lines.append(
                    f"{i},{t!r},{com.x!r},{com.y!r},"
                    f"{state.speed!r},{state.direction.x!r},{state.direction.y!r}"
                )
        (out / "com_frames.csv").write_text("\n".join(lines) + "\n")
        _, state = make_context(scenario)
        (out / "com_state.json").write_text(json.dumps({
            "frame": scenario.max_effort_index,
            "time_s": scenario.frames[scenario.max_effort_index].time,
            "position_m": [state.position.x, state.position.y],
            "direction": [state.direction.x, state.direction.y],
            "speed_mps": state.speed,
        }, indent=2) + "\n")
        print(f"wrote {out / 'com_frames.csv'} and {out / 'com_state.json'}")
    return 0


def _run_optimization(scenario: Scenario, args: argparse.Namespace):
    ctx, _ = make_context(scenario)
    return ctx, optimize_placement(
        ctx,
        scenario.limits,
        scenario.objective,
        robot=scenario.robot,
        floor_y=scenario.floor_y,
        robot_base=_robot_base(args),
        constrained=getattr(args, "constrained", False),
    )


def _cmd_optimize(args: argparse.Namespace) -> int:
    scenario = _load(args)
    ctx, (placement, landscape) = _run_optimization(scenario, args)
    out = _out_dir(args)
    report_path, csv_path = write_placement_report(
        scenario, placement, landscape, out,
        constrained=args.constrained, robot_base=_robot_base(args),
    )
    print(f"scenario: {scenario.name}")
    print(f"theta5_opt_deg: {_g(math.degrees(placement.theta5_opt))}")
    print(f"theta6_opt_deg: {_g(math.degrees(placement.theta6_opt))}")
    print(f"handle_xy_m: {_g(placement.handle.x)} {_g(placement.handle.y)}")
    print(f"objective: {_g(placement.objective_value)}")
    print(f"f_arm_n: {_g(placement.f_arm.x)} {_g(placement.f_arm.y)}")
    print(f"f_along_v_n: {_g(placement.f_arm.dot(ctx.v))}")
    print(f"torque_signs: {placement.torque_signs[0]:+d} "
          f"{placement.torque_signs[1]:+d} {placement.torque_signs[2]:+d}")
    if placement.feasibility:
        for violation in placement.feasibility:
            print(f"infeasible[{violation.kind}]: {violation.message}")
    else:
        print("feasible: yes")
    print(f"wrote {report_path} and {csv_path}")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    scenario = _load(args)
    frame = args.frame if args.frame is not None else scenario.max_effort_index
    if not 0 <= frame < len(scenario.frames):
        raise IndexOutOfRange(
            f"frame {frame} is out of range for {len(scenario.frames)} frames"
        )
    placement = None
    if not args.no_placement:
        _, (placement, _) = _run_optimization(scenario, args)
    svg = render_scene(scenario, frame, placement)
    out = _out_dir(args)
    path = out / f"scene_frame{frame:03d}.svg"
    path.write_text(svg)
    print(f"wrote {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = _load(args)
    start, stop, step = _csv_floats(args.range, 3, "--range")
    if step <= 0.0 or stop < start:
        raise ValidationError("--range must satisfy start <= stop with step > 0")
    values = []
    v = start
    while v <= stop + 1e-12:
        values.append(round(v, 12))
        v += step

    out = _out_dir(args)
    rows = ["value,theta5_opt_deg,theta6_opt_deg,objective,handle_x_m,handle_y_m"]
    print(f"{'a':>10} {'theta5_deg':>12} {'theta6_deg':>12} {'objective':>14}")
    for value in values:
        swept = replace(scenario, objective=replace(scenario.objective, a=value))
        ctx, (placement, landscape) = _run_optimization(swept, args)
        t5 = math.degrees(placement.theta5_opt)
        t6 = math.degrees(placement.theta6_opt)
        rows.append(
            f"{value!r},{t5!r},{t6!r},{placement.objective_value!r},"
            f"{placement.handle.x!r},{placement.handle.y!r}"
        )
        print(f"{_g(value):>10} {_g(t5):>12} {_g(t6):>12} {_g(placement.objective_value):>14}")
        stem = f"landscape_{args.param}_{value:.6g}"
        write_landscape_csv(landscape, out / f"{stem}.csv")
        (out / f"{stem}.svg").write_text(render_landscape(landscape))
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote {out / 'sweep.csv'} and {2 * len(values)} landscape files")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handleopt",
        description="Optimal support-handle placement for postural transitions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and print findings")
    _add_common(p)
    _add_overrides(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze", help="print per-frame COM positions and velocities")
    _add_common(p)
    _add_overrides(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("optimize", help="search the joint grid for the best handle point")
    _add_common(p)
    _add_overrides(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("render", help="draw one frame as an SVG scene")
    _add_common(p)
    _add_overrides(p)
    p.add_argument("--frame", type=int, default=None,
                   help="frame index (default: the max-effort frame)")
    p.add_argument("--no-placement", action="store_true",
                   help="draw the recorded pose without the optimized arm overlay")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("sweep", help="re-optimize across a parameter range")
    _add_common(p)
    _add_overrides(p)
    p.add_argument("--param", choices=("a",), required=True,
                   help="parameter to sweep")
    p.add_argument("--range", required=True, metavar="START,STOP,STEP",
                   help="inclusive sweep range")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail("parse", exc, 2)
    except SchemaError as exc:
        return _fail("schema", exc, 2)
    except ValidationError as exc:
        return _fail("validation", exc, 1)
    except argparse.ArgumentTypeError as exc:
        return _fail("usage", exc, 2)
    except _NUMERIC_ERRORS as exc:
        return _fail("numeric", exc, 3)
    except OSError as exc:
        return _fail("io", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
