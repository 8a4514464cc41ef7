import math

import numpy as np
import pytest

from neckbrace import csvio, fitlab, mechanism, protocol, stats
from neckbrace.errors import ParseError
from neckbrace.signals import SignalTrace


def test_trace_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    trace = SignalTrace(1000.0, {name: rng.normal(size=50) for name in csvio.EMG_COLUMNS})
    back = csvio.read_emg(csvio.write_emg(tmp_path / "emg.csv", trace))
    assert back.sample_rate == pytest.approx(1000.0)
    for name in csvio.EMG_COLUMNS:
        assert np.array_equal(back[name], trace[name])
    raw = (tmp_path / "emg.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"time_s,scm_l_v")


def test_plan_round_trip(tmp_path):
    plan = protocol.generate_sequence(seed=4)
    back = csvio.read_plan(csvio.write_plan(tmp_path / "plan.csv", plan))
    assert back.sequence == plan.sequence
    assert [c.t_hold_start for c in back.cycles] == [c.t_hold_start for c in plan.cycles]


def test_curve_and_bend_round_trip(tmp_path):
    spec = mechanism.BarArraySpec(gap=1e-3)
    grid = np.radians(np.linspace(0, 40, 21))
    curve = mechanism.moment_curve(spec, grid)
    back = csvio.read_moment_curve(csvio.write_moment_curve(tmp_path / "c.csv", curve))
    assert np.array_equal(back.moment, curve.moment) and back.branch == curve.branch

    trace = fitlab.synthesize_bend_test(spec, grid[1:])
    again = csvio.read_bend_test(csvio.write_bend_test(tmp_path / "b.csv", trace))
    assert np.array_equal(again.force, trace.force)
    assert list(again.branch) == list(trace.branch)


def test_profile_round_trip(tmp_path):
    target = protocol.POSTURES[3]
    profile = protocol.ActivationProfile({("spl_left", "loaded", target): 0.42}, default=0.3, rest=0.07)
    back = csvio.read_profile(csvio.write_profile(tmp_path / "prof.csv", profile))
    assert back.levels == profile.levels and back.default == 0.3 and back.rest == 0.07


def test_tables_round_trip(tmp_path):
    table = protocol.synth_activity_table(n_participants=3, seed=2)
    back = csvio.read_activity_table(csvio.write_activity_table(tmp_path / "a.csv", table))
    assert back.equals(table)
    cmp = stats.compare_conditions(table)
    again = csvio.read_comparison(csvio.write_comparison(tmp_path / "c.csv", cmp))
    assert np.array_equal(again.p_value.to_numpy(), cmp.p_value.to_numpy(), equal_nan=True)
    assert list(again.significant_05) == list(cmp.significant_05)


def write(tmp_path, text):
    path = tmp_path / "x.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_error_carries_line_number(tmp_path):
    path = write(tmp_path, "time_s,roll_rad,pitch_rad,yaw_rad\n0,0,0,0\n0.01,0,abc,0\n")
    with pytest.raises(ParseError) as info:
        csvio.read_kinematics(path)
    assert info.value.line == 3 and f"{path}:3" in str(info.value)


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError, match="missing columns"):
        csvio.read_kinematics(write(tmp_path, "time_s,roll_rad\n0,0\n"))
    with pytest.raises(ParseError, match="uniformly"):
        csvio.read_kinematics(write(tmp_path, "time_s,roll_rad,pitch_rad,yaw_rad\n0,0,0,0\n0.01,0,0,0\n0.03,0,0,0\n"))
    with pytest.raises(ParseError, match="increasing"):
        csvio.read_kinematics(write(tmp_path, "time_s,roll_rad,pitch_rad,yaw_rad\n0,0,0,0\n0,0,0,0\n"))
    with pytest.raises(ParseError):
        csvio.read_plan(write(tmp_path, ",".join(csvio.PLAN_COLUMNS) + "\n0,sagittal,33,0,5,15,17\n"))
    with pytest.raises(ParseError, match="empty"):
        csvio.read_plan(write(tmp_path, ""))
    with pytest.raises(ParseError, match="cannot open"):
        csvio.read_plan(tmp_path / "missing.csv")


def test_fmt():
    assert csvio.fmt(0.1) == "0.1"
    assert csvio.fmt(True) == "true"
    assert csvio.fmt(np.int64(3)) == "3"
    assert csvio.fmt(math.nan) == "nan"
