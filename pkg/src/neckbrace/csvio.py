"""Readers and writers for the toolkit's CSV files.

All files are UTF-8 with LF line endings, a header row and '.' decimals.
Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from . import fitlab
from .errors import DomainError, ParseError
from .mechanism import Branch, MomentCurve
from .protocol import ActivationProfile, Cycle, NEUTRAL_DWELL, PostureTarget, TrialPlan
from .signals import ACTIVITY_COLUMNS, EMG_CHANNELS, KIN_CHANNELS, SignalTrace
from .stats import COMPARISON_COLUMNS

EMG_COLUMNS = {"scm_left": "scm_l_v", "scm_right": "scm_r_v", "spl_left": "spl_l_v", "spl_right": "spl_r_v"}
KIN_COLUMNS = {"roll": "roll_rad", "pitch": "pitch_rad", "yaw": "yaw_rad"}
PLAN_COLUMNS = ["cycle_idx", "plane", "angle_deg", "t_start_s", "t_hold_start_s", "t_hold_end_s", "t_end_s"]
BEND_COLUMNS = ["time_s", "force_N", "displacement_m", "angle_rad", "branch"]
CURVE_COLUMNS = ["theta_rad", "moment_Nm", "branch"]
PROFILE_COLUMNS = ["muscle", "condition", "plane", "angle_deg", "amplitude"]


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_rows(path, required):
    """Yield ``(line_number, record)`` dicts, checking the header first."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot open file ({exc.strerror})", path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", path, 1)
        records = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, line)
            records.append((line, dict(zip(header, (v.strip() for v in row)))))
        return records


def _float(record, key, path, line, finite=True):
    text = record[key]
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {key!r}: {text!r} is not a number", path, line) from None
    if finite and not math.isfinite(value):
        raise ParseError(f"column {key!r}: non-finite value {text!r}", path, line)
    return value


def _columns(path, mapping):
    """Read float columns named by ``mapping`` (name -> csv column) plus time."""
    wanted = ["time_s", *mapping.values()]
    try:
        frame = pd.read_csv(path, usecols=wanted, dtype=float, encoding="utf-8", float_precision="round_trip")
        if not np.all(np.isfinite(frame.to_numpy())):
            raise ValueError("non-finite")
    except (ValueError, OSError, pd.errors.ParserError):
        # slow path, only to report the offending line
        records = read_rows(path, wanted)
        for ln, r in records:
            for col in wanted:
                _float(r, col, path, ln)
        raise ParseError("unreadable numeric table", path) from None
    if len(frame) < 2:
        raise ParseError("need at least two samples", path)
    time = frame["time_s"].to_numpy()
    data = {name: frame[col].to_numpy() for name, col in mapping.items()}
    step = np.diff(time)
    if np.any(step <= 0):
        bad = int(np.flatnonzero(step <= 0)[0]) + 1
        raise ParseError("time_s must be strictly increasing", path, bad + 2)
    dt = step.mean()
    if np.max(np.abs(step - dt)) > 1e-6 * dt + 1e-9:
        raise ParseError("time_s must be uniformly sampled", path)
    return time, SignalTrace(1.0 / dt, data)


def _write_trace(path, trace, mapping):
    frame = pd.DataFrame({"time_s": trace.time, **{col: trace[name] for name, col in mapping.items()}})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # pandas writes floats with repr, so values round-trip exactly
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


def read_emg(path):
    return _columns(path, EMG_COLUMNS)[1]


def write_emg(path, trace):
    return _write_trace(path, trace, EMG_COLUMNS)


def read_kinematics(path):
    """Kinematics trace plus its time column (needed for sweeps)."""
    return _columns(path, KIN_COLUMNS)


def write_kinematics(path, trace):
    return _write_trace(path, trace, KIN_COLUMNS)


def write_plan(path, plan):
    rows = [
        (i, c.target.plane, c.target.angle, c.t_start, c.t_hold_start, c.t_hold_end, c.t_end)
        for i, c in enumerate(plan.cycles)
    ]
    return write_rows(path, PLAN_COLUMNS, rows)


def read_plan(path):
    cycles = []
    for line, r in read_rows(path, PLAN_COLUMNS):
        try:
            target = PostureTarget(r["plane"], _float(r, "angle_deg", path, line))
        except DomainError as exc:
            raise ParseError(str(exc), path, line) from None
        t0, th0, th1, t1 = (_float(r, k, path, line) for k in PLAN_COLUMNS[3:])
        if not t0 <= th0 <= th1 <= t1:
            raise ParseError("cycle times must be ordered", path, line)
        approach = th0 - t0 - NEUTRAL_DWELL
        if approach < 0:
            raise ParseError("hold starts before the neutral dwell ends", path, line)
        cycles.append(Cycle(target, t0, NEUTRAL_DWELL, approach, th1 - th0, t1 - th1))
    return TrialPlan(tuple(cycles))


def write_bend_test(path, trace):
    rows = zip(trace.time, trace.force, trace.displacement, trace.angle, trace.branch)
    return write_rows(path, BEND_COLUMNS, rows)


def read_bend_test(path):
    records = read_rows(path, BEND_COLUMNS)
    cols = {k: [] for k in BEND_COLUMNS}
    for line, r in records:
        for k in BEND_COLUMNS[:-1]:
            cols[k].append(_float(r, k, path, line))
        if r["branch"] not in (fitlab.LOAD, fitlab.UNLOAD):
            raise ParseError(f"branch must be 'load' or 'unload', got {r['branch']!r}", path, line)
        cols["branch"].append(r["branch"])
    try:
        return fitlab.BendTestTrace(
            cols["time_s"], cols["force_N"], cols["displacement_m"], cols["angle_rad"], cols["branch"]
        )
    except DomainError as exc:
        raise ParseError(str(exc), path) from None


def write_moment_curve(path, curve):
    rows = zip(curve.theta, curve.moment, (b.value for b in curve.branch))
    return write_rows(path, CURVE_COLUMNS, rows)


def read_moment_curve(path):
    records = read_rows(path, CURVE_COLUMNS)
    theta = np.array([_float(r, "theta_rad", path, ln) for ln, r in records])
    moment = np.array([_float(r, "moment_Nm", path, ln) for ln, r in records])
    try:
        branch = tuple(Branch(r["branch"]) for _, r in records)
    except ValueError as exc:
        raise ParseError(str(exc), path) from None
    posts = [t for t, b in zip(theta, branch) if b is Branch.POST]
    return MomentCurve(theta, moment, branch, posts[0] if posts else None)


def write_profile(path, profile):
    rows = [(m, c, t.plane, t.angle, v) for (m, c, t), v in sorted(profile.levels.items())]
    rows += [("*", "*", "default", "", profile.default), ("*", "*", "rest", "", profile.rest)]
    return write_rows(path, PROFILE_COLUMNS, rows)


def read_profile(path):
    profile = ActivationProfile()
    for line, r in read_rows(path, PROFILE_COLUMNS):
        amplitude = _float(r, "amplitude", path, line)
        if amplitude < 0:
            raise ParseError("amplitude must be non-negative", path, line)
        if r["plane"] == "default":
            profile.default = amplitude
        elif r["plane"] == "rest":
            profile.rest = amplitude
        else:
            if r["muscle"] not in EMG_CHANNELS:
                raise ParseError(f"unknown muscle {r['muscle']!r}", path, line)
            try:
                target = PostureTarget(r["plane"], _float(r, "angle_deg", path, line))
            except DomainError as exc:
                raise ParseError(str(exc), path, line) from None
            profile.levels[(r["muscle"], r["condition"], target)] = amplitude
    return profile


def _write_frame(path, frame, columns):
    return write_rows(path, columns, frame[columns].itertuples(index=False, name=None))


def _read_frame(path, columns, numeric, boolean=()):
    records = read_rows(path, columns)
    data = {c: [] for c in columns}
    for line, r in records:
        for c in columns:
            if c in numeric:
                data[c].append(_float(r, c, path, line, finite=False))
            elif c in boolean:
                if r[c] not in ("true", "false"):
                    raise ParseError(f"column {c!r}: expected true/false", path, line)
                data[c].append(r[c] == "true")
            else:
                data[c].append(r[c])
    return pd.DataFrame(data, columns=columns)


def write_activity_table(path, table):
    return _write_frame(path, table, ACTIVITY_COLUMNS)


def read_activity_table(path):
    df = _read_frame(path, ACTIVITY_COLUMNS, {"posture_deg", "activity_norm"})
    if (df.activity_norm < 0).any() or not np.all(np.isfinite(df.activity_norm)):
        raise ParseError("activity_norm must be finite and non-negative", path)
    return df


def write_comparison(path, table):
    """Write the comparison columns first, then any diagnostics columns."""
    extra = [c for c in table.columns if c not in COMPARISON_COLUMNS]
    return _write_frame(path, table, COMPARISON_COLUMNS + extra)


def read_comparison(path):
    numeric = set(COMPARISON_COLUMNS[2:-1])
    return _read_frame(path, COMPARISON_COLUMNS, numeric, boolean={"significant_05"})


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
