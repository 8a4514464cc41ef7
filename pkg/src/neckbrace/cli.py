"""Command-line entry point ``neckbrace``.

Exit codes: 0 success, 2 usage or configuration error, 3 unreadable data file,
4 numerical failure.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import biomech, csvio, emg, fitlab, mechanism, protocol, stats
from .config import load_config
from .errors import ConfigurationError, DomainError, NumericError, ParseError

log = logging.getLogger("neckbrace")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def gap_mm(text):
    """Parse a gap in millimetres; ``inf`` selects the Base mode."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid gap {text!r}: expected millimetres or 'inf'") from None
    if math.isnan(value) or value == -math.inf:
        raise argparse.ArgumentTypeError(f"invalid gap {text!r}")
    return value


def _spec_with_gap(cfg, delta):
    spec = cfg.bar_array if delta is None else cfg.bar_array.with_gap(delta * 1e-3)
    # fail early on gaps the model cannot represent
    try:
        if spec.gap < 0:
            mechanism.preload_angle(spec)
        if spec.gap < math.inf:
            mechanism.equivalent_inertia(spec, mechanism.StiffnessMode.LOADED)
    except NumericError as exc:
        raise ConfigurationError(f"invalid gap: {exc}") from exc
    return spec


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_simulate_bending(args, cfg, out):
    if not 0 < args.theta_max <= math.degrees(mechanism.THETA_MAX):
        raise ConfigurationError("--theta-max must lie in (0, 85] degrees")
    if args.steps < 2:
        raise ConfigurationError("--steps must be at least 2")
    spec = _spec_with_gap(cfg, args.delta)
    grid = np.linspace(0.0, math.radians(args.theta_max), args.steps)
    curve = mechanism.moment_curve(spec, grid)
    path = csvio.write_moment_curve(out / "moments.csv", curve)
    print(f"wrote {path}")
    if not args.no_plot:
        from .plotting import plot_moment_curves

        label = "base" if math.isinf(spec.gap) else f"gap {spec.gap * 1e3:g} mm"
        svg = plot_moment_curves(out / "moments.svg", {label: curve})
        print(f"wrote {svg}")
    if curve.transition_angle is not None:
        print(f"transition angle: {math.degrees(curve.transition_angle):.4f} deg")


def device_moment(spec, theta):
    """Device base moment at arbitrary angles; ``nan`` outside ``[0, 85 deg]``."""
    theta = np.asarray(theta, dtype=float)
    moment = np.full(theta.shape, np.nan)
    valid = (theta >= 0) & (theta <= mechanism.THETA_MAX)
    if np.any(valid):
        grid, inverse = np.unique(theta[valid], return_inverse=True)
        moment[valid] = mechanism.moment_curve(spec, grid).moment[inverse]
    return moment


def ideal_moment_table(time, theta, template, spec):
    ideal = np.array([biomech.ideal_base_moment(template.at(float(t))) for t in theta])
    device = device_moment(spec, theta)
    fraction = np.full(theta.shape, np.nan)
    ok = np.isfinite(device) & (ideal > 0)
    fraction[ok] = device[ok] / ideal[ok]
    return pd.DataFrame({
        "time_s": time, "theta_rad": theta, "bm_id_Nm": ideal,
        "device_moment_Nm": device, "assist_fraction": fraction,
    })


def cmd_ideal_moment(args, cfg, out):
    time, kin = csvio.read_kinematics(args.kinematics)
    spec = _spec_with_gap(cfg, args.delta)
    table = ideal_moment_table(time, kin["pitch"], cfg.statics, spec)
    path = csvio.write_rows(out / "ideal_moment.csv", list(table.columns), table.itertuples(index=False, name=None))
    print(f"wrote {path}")


def cmd_fit(args, cfg, out):
    height = cfg.load_height if args.load_height is None else args.load_height
    if not height > 0:
        raise ConfigurationError("--load-height must be positive")
    trace = csvio.read_bend_test(args.bend_test)
    loading, unloading = fitlab.branches(trace, height)
    result = fitlab.fit_parameters(loading, unloading, cfg.bar_array.free_length)
    t_star = result.transition_angle_est
    row = (
        result.stiffness_pre, result.stiffness_post,
        math.nan if t_star is None else t_star,
        math.nan if t_star is None else math.degrees(t_star),
        result.friction_moment, result.residual_rms,
    )
    header = ["stiffness_pre_Nm2", "stiffness_post_Nm2", "transition_angle_rad",
              "transition_angle_deg", "friction_moment_Nm", "residual_rms_Nm"]
    csvio.write_rows(out / "fit_report.csv", header, [row])
    lines = [f"{h}: {csvio.fmt(v)}" for h, v in zip(header, row)]
    if t_star is None:
        lines.append("no stiffness transition detected")
    text = "\n".join(lines) + "\n"
    (out / "fit_report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_emg_process(args, cfg, out):
    groups = [args.emg, args.kin, args.plan, args.condition]
    if len({len(g) for g in groups}) != 1:
        raise ConfigurationError("--emg, --kin, --plan and --condition must be given the same number of times")
    sessions = []
    for emg_path, kin_path, plan_path, condition in zip(*groups):
        _, kin = csvio.read_kinematics(kin_path)
        plan = csvio.read_plan(plan_path)
        sessions.append(emg.Session(condition, csvio.read_emg(emg_path), kin, plan.sequence))
    table = emg.process_participant(sessions, args.participant, cfg.pipeline, cfg.segmentation)
    path = out / "activity_table.csv"
    if args.append and path.exists():
        table = pd.concat([csvio.read_activity_table(path), table], ignore_index=True)
    csvio.write_activity_table(path, table)
    print(f"wrote {path}")


def cmd_stats(args, cfg, out):
    table = csvio.read_activity_table(args.table)
    result = stats.compare_conditions(table, include_backward_40=args.include_backward_40)
    path = csvio.write_comparison(out / "comparison.csv", result)
    print(f"wrote {path}")


def cmd_gen_protocol(args, cfg, out):
    plan = protocol.generate_sequence(args.seed)
    path = csvio.write_plan(out / "plan.csv", plan)
    print(f"wrote {path}")


def cmd_synth(args, cfg, out):
    plan = csvio.read_plan(args.plan)
    profile = protocol.ActivationProfile() if args.profile is None else csvio.read_profile(args.profile)
    kin, raw, truth = protocol.synth_trial(
        plan, profile, noise_seed=args.seed, condition=args.condition,
        kin_rate=cfg.kin_rate, emg_rate=cfg.emg_rate,
    )
    csvio.write_kinematics(out / "kinematics.csv", kin)
    csvio.write_emg(out / "emg.csv", raw)
    payload = {
        "condition": truth.condition,
        "seed": args.seed,
        "kin_rate_Hz": cfg.kin_rate,
        "emg_rate_Hz": cfg.emg_rate,
        "hold_intervals_s": [list(iv) for iv in truth.hold_intervals],
        "hold_amplitude": [
            {"muscle": m, "plane": t.plane, "angle_deg": t.angle, "amplitude": v}
            for (m, t), v in sorted(truth.hold_amplitude.items())
        ],
    }
    csvio.write_json(out / "truth.json", payload)
    print(f"wrote {out / 'kinematics.csv'}, {out / 'emg.csv'}, {out / 'truth.json'}")


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser():
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML configuration file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="neckbrace", parents=[common],
                                     description="Neck exoskeleton modelling and EMG analysis toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-bending", parents=[common], help="bar-array moment curve")
    p.add_argument("--delta", type=gap_mm, default=None, help="gap in mm, or 'inf' (default: config)")
    p.add_argument("--theta-max", type=float, default=85.0, help="largest bending angle [deg]")
    p.add_argument("--steps", type=int, default=171)
    p.add_argument("--no-plot", action="store_true", help="skip the SVG")
    p.set_defaults(func=cmd_simulate_bending)

    p = sub.add_parser("ideal-moment", parents=[common], help="ideal device moment along a head trajectory")
    p.add_argument("--kinematics", required=True)
    p.add_argument("--delta", type=gap_mm, default=None, help="gap of the compared device [mm]")
    p.set_defaults(func=cmd_ideal_moment)

    p = sub.add_parser("fit", parents=[common], help="fit bench bending data")
    p.add_argument("--bend-test", required=True)
    p.add_argument("--load-height", type=float, default=None, help="load point height [m]")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("emg-process", parents=[common], help="EMG pipeline to an activity table")
    p.add_argument("--emg", action="append", required=True)
    p.add_argument("--kin", action="append", required=True)
    p.add_argument("--plan", action="append", required=True)
    p.add_argument("--condition", action="append", required=True, choices=protocol.CONDITIONS)
    p.add_argument("--participant", default="P01")
    p.add_argument("--append", action="store_true", help="add rows to an existing activity table")
    p.set_defaults(func=cmd_emg_process)

    p = sub.add_parser("stats", parents=[common], help="Base vs Loaded comparison")
    p.add_argument("--table", required=True)
    p.add_argument("--include-backward-40", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen-protocol", parents=[common], help="randomized posture plan")
    p.set_defaults(func=cmd_gen_protocol)

    p = sub.add_parser("synth", parents=[common], help="synthetic kinematics and EMG")
    p.add_argument("--plan", required=True)
    p.add_argument("--profile", default=None)
    p.add_argument("--condition", choices=protocol.CONDITIONS, default="base")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out", None), ("seed", None), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        out = Path(args.out) if args.out is not None else cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        args.func(args, cfg, out)
    except ConfigurationError as exc:
        print(f"neckbrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"neckbrace: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, DomainError) as exc:
        print(f"neckbrace: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
