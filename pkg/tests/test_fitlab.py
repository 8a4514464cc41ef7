import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neckbrace import fitlab as f
from neckbrace import mechanism as m
from neckbrace.errors import DomainError, FitError

L = 0.08
H = 0.12
SPEC = m.BarArraySpec()
GAP_20 = m.end_shortening(math.radians(20), L)
GRID = np.radians(np.linspace(2, 40, 77))


def test_lever_geometry():
    # a load at height h, offset d along the crosshead, tilted by theta
    assert f.lever_arm(0.0, 0.0, H) == pytest.approx(H)
    t = math.radians(30)
    assert f.lever_arm(0.01, t, H) == pytest.approx(H * math.cos(t) + 0.01 * math.sin(t))


def test_synthetic_moment_reproduces_curve():
    spec = SPEC.with_gap(GAP_20)
    trace = f.synthesize_bend_test(spec, GRID)
    angle, moment = f.compute_base_moment(trace, H)
    curve = m.moment_curve(spec, GRID)
    assert np.allclose(moment[: GRID.size], curve.moment, rtol=1e-12)


def test_detect_transition_on_hinge():
    x = np.linspace(0, 1, 41)
    y = np.where(x < 0.4, x, 0.4 + 5 * (x - 0.4))
    assert f.detect_transition(x, y) == pytest.approx(0.4)


def test_detect_transition_rejects_line_and_short_input():
    x = np.linspace(0, 1, 30)
    assert f.detect_transition(x, 3 * x + 1) is None
    assert f.detect_transition(x[:7], x[:7] ** 2) is None


@given(st.floats(-5, 5), st.floats(0.2, 0.8))
@settings(max_examples=30, deadline=None)
def test_detect_transition_shift_equivariant(shift, knee):
    x = np.linspace(0, 1, 51)
    y = np.where(x < knee, x, knee + 4 * (x - knee))
    a = f.detect_transition(x, y)
    b = f.detect_transition(x + shift, y)
    assert b == pytest.approx(a + shift, abs=1e-9)


def test_fit_base_only():
    trace = f.synthesize_bend_test(SPEC, GRID)
    res = f.fit_parameters(*f.branches(trace, H))
    ei = SPEC.stiffness(m.StiffnessMode.BASE)
    assert res.transition_angle_est is None
    assert res.stiffness_pre == pytest.approx(ei, rel=1e-9)
    assert res.stiffness_post == res.stiffness_pre


def test_fit_two_regime_with_friction():
    spec = SPEC.with_gap(GAP_20)
    trace = f.synthesize_bend_test(spec, GRID, friction=0.05)
    res = f.fit_parameters(*f.branches(trace, H))
    assert res.stiffness_pre == pytest.approx(spec.stiffness(m.StiffnessMode.BASE), rel=1e-6)
    assert res.stiffness_post == pytest.approx(spec.stiffness(m.StiffnessMode.LOADED), rel=1e-6)
    assert math.degrees(res.transition_angle_est) == pytest.approx(20, abs=1e-4)
    assert res.friction_moment == pytest.approx(0.05, rel=1e-9)


def test_friction_symmetric_band():
    x = np.linspace(0, 1, 20)
    assert f.friction_moment((x, x + 0.3), (x, x - 0.3)) == pytest.approx(0.3)
    with pytest.raises(FitError):
        f.friction_moment((x, x), (x + 2, x))


def test_fit_needs_enough_samples():
    x = np.linspace(0.1, 0.5, 5)
    with pytest.raises(FitError):
        f.fit_parameters((x, x), (x, x))


def test_trace_validation():
    with pytest.raises(DomainError):
        f.BendTestTrace([0, 1], [1, -1], [0, 0], [0, 0.1], ["load", "load"])
    with pytest.raises(DomainError):
        f.BendTestTrace([0, 0], [1, 1], [0, 0], [0, 0.1], ["load", "load"])
    with pytest.raises(DomainError):
        f.BendTestTrace([0, 1], [1, 1], [0, 0], [0, 0.1], ["load", "sideways"])
    with pytest.raises(DomainError):
        f.compute_base_moment(f.synthesize_bend_test(SPEC, GRID), 0.0)


def test_nonmonotone_angle_warns(caplog):
    trace = f.synthesize_bend_test(SPEC, GRID)
    trace.angle[3], trace.angle[4] = trace.angle[4], trace.angle[3]
    f.compute_base_moment(trace, H)
    assert "non-monotone" in caplog.text
