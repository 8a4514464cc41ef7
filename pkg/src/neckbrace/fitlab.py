"""Bench characterization: base-moment reconstruction and model fitting.

The test stand pushes horizontally at a fixed height ``h`` above the actuator
base, perpendicular to the rigid upper attachment.  With crosshead travel
``d`` and bar bending angle ``theta`` the load point sits at ``(d, h)`` and the
force direction is the attachment normal ``(cos t, -sin t)``, so the moment
about the base is ``F * (h cos t + d sin t)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from . import mechanism
from .errors import DomainError, FitError

log = logging.getLogger(__name__)

MIN_BRANCH_SAMPLES = 8
MIN_SEGMENT_POINTS = 3
IMPROVEMENT_THRESHOLD = 0.05

LOAD = "load"
UNLOAD = "unload"


@dataclass
class BendTestTrace:
    """Time series recorded by the test stand and the bar IMU."""

    time: np.ndarray
    force: np.ndarray
    displacement: np.ndarray
    angle: np.ndarray
    branch: np.ndarray

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        self.displacement = np.asarray(self.displacement, dtype=float)
        self.angle = np.asarray(self.angle, dtype=float)
        self.branch = np.asarray(self.branch, dtype=object)
        n = self.time.size
        if any(a.size != n for a in (self.force, self.displacement, self.angle, self.branch)):
            raise DomainError("all trace columns must have equal length")
        if np.any(np.diff(self.time) <= 0):
            raise DomainError("time must be strictly increasing")
        if np.any(self.force < 0):
            raise DomainError("force must be non-negative")
        if np.any(self.angle < 0) or np.any(self.angle > mechanism.THETA_MAX + 1e-12):
            raise DomainError("bend angle must lie within [0, 85 deg]")
        bad = set(self.branch.tolist()) - {LOAD, UNLOAD}
        if bad:
            raise DomainError(f"unknown branch labels {sorted(bad)}")

    def __len__(self):
        return self.time.size

    def select(self, label):
        mask = self.branch == label
        return self.angle[mask], mask


@dataclass
class FitResult:
    stiffness_pre: float
    stiffness_post: float
    transition_angle_est: Optional[float]
    friction_moment: float
    residual_rms: float


def lever_arm(displacement, angle, load_height):
    return load_height * np.cos(angle) + displacement * np.sin(angle)


def compute_base_moment(trace, load_height):
    """Moment about the actuator base for each sample.

    Returns
    -------
    angle, moment : ndarray
    """
    if not load_height > 0:
        raise DomainError("load_height must be positive")
    for label in (LOAD, UNLOAD):
        angles, _ = trace.select(label)
        steps = np.diff(angles)
        direction = 1 if label == LOAD else -1
        if np.any(direction * steps < 0):
            log.warning("non-monotone bend angle within %s branch; samples kept", label)
    lever = lever_arm(trace.displacement, trace.angle, load_height)
    moment = np.where(trace.force == 0, 0.0, trace.force * lever)
    return trace.angle.copy(), moment


# --------------------------------------------------------------------------
# Transition detection
# --------------------------------------------------------------------------

def _line_sse(x, y):
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def _hinge_sse(x, y, breakpoint):
    design = np.column_stack([np.ones_like(x), x, np.maximum(x - breakpoint, 0.0)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def detect_transition(angle, moment):
    """Locate a slope change with a continuous two-segment linear fit.

    Every sampled angle with at least three samples on each side is tried as
    the breakpoint; the one with the smallest squared error wins.  Returns
    ``None`` for fewer than 8 samples or when the two-segment fit improves
    on a single line by less than 5 %.
    """
    x = np.asarray(angle, dtype=float)
    y = np.asarray(moment, dtype=float)
    if x.size < MIN_BRANCH_SAMPLES:
        return None
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    # centring keeps the search shift-equivariant in floating point
    offset = x.mean()
    xc = x - offset

    sse_line = _line_sse(xc, y)
    candidates = np.unique(xc[MIN_SEGMENT_POINTS - 1 : x.size - MIN_SEGMENT_POINTS + 1])
    if candidates.size == 0:
        return None
    sses = np.array([_hinge_sse(xc, y, c) for c in candidates])
    best = int(np.argmin(sses))
    scale = max(sse_line, np.finfo(float).tiny)
    if sse_line <= 1e-24 * max(1.0, float(y @ y)) or (sse_line - sses[best]) / scale < IMPROVEMENT_THRESHOLD:
        return None
    return float(candidates[best] + offset)


# --------------------------------------------------------------------------
# Parameter fit
# --------------------------------------------------------------------------

def friction_moment(loading, unloading, n_common=200):
    """Half the mean vertical gap between the branches over their shared range."""
    (xa, ya), (xb, yb) = (_sorted(*loading), _sorted(*unloading))
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    if not hi > lo:
        raise FitError("loading and unloading branches share no angle range")
    grid = np.linspace(lo, hi, n_common)
    gap = np.interp(grid, xa, ya) - np.interp(grid, xb, yb)
    return 0.5 * abs(float(gap.mean()))


def _sorted(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    return x[order], y[order]


def _design(theta, unit, t_star, unit_star):
    pre = np.where(theta < t_star, unit, unit_star)
    post = np.where(theta < t_star, 0.0, unit - unit_star)
    return np.column_stack([pre, post])


def _fit_at(theta, moment, free_length, unit, t_star):
    unit_star = mechanism.unit_moment(t_star, free_length)
    design = _design(theta, unit, t_star, unit_star)
    coef, *_ = np.linalg.lstsq(design, moment, rcond=None)
    resid = moment - design @ coef
    return coef, float(resid @ resid)


def fit_parameters(loading, unloading, free_length=mechanism.BarArraySpec.free_length):
    """Fit pre/post-transition stiffness, transition angle and friction.

    Friction is removed first as a symmetric band around the frictionless
    backbone.  The backbone is then fitted by linear least squares in
    ``(EI_pre, EI_post)`` for each trial transition angle; the angle comes
    from :func:`detect_transition` and is refined by a bounded scalar search.

    Parameters
    ----------
    loading, unloading : (angle, moment) pairs of arrays
        The two branches of one bending cycle.
    free_length : float
        Bar free length [m].
    """
    xa, ya = _sorted(*loading)
    xb, yb = _sorted(*unloading)
    for name, x in (("loading", xa), ("unloading", xb)):
        if x.size < MIN_BRANCH_SAMPLES:
            raise FitError(f"{name} branch needs at least {MIN_BRANCH_SAMPLES} samples")
        if np.ptp(x) == 0:
            raise FitError(f"{name} branch has no angle spread")

    friction = friction_moment((xa, ya), (xb, yb))
    theta = np.concatenate([xa, xb])
    backbone = np.concatenate([ya - friction, yb + friction])
    order = np.argsort(theta, kind="stable")
    theta, backbone = theta[order], backbone[order]
    if np.any(theta >= 0.5 * math.pi):
        raise DomainError("bend angles must stay below pi/2")
    unit = np.array([mechanism.unit_moment(t, free_length) for t in theta])
    if not np.any(unit > 0):
        raise FitError("all samples at zero bending angle")

    single = float(unit @ backbone / (unit @ unit))
    single_sse = float(np.sum((backbone - single * unit) ** 2))
    result = FitResult(single, single, None, friction, math.sqrt(single_sse / theta.size))

    guess = detect_transition(theta, backbone)
    if guess is None:
        return result

    candidates = np.unique(theta[(theta > theta[0]) & (theta < theta[-1])])
    sses = np.array([_fit_at(theta, backbone, free_length, unit, c)[1] for c in candidates])
    k = int(np.argmin(sses))
    lo = candidates[max(k - 1, 0)]
    hi = candidates[min(k + 1, candidates.size - 1)]
    if hi > lo:
        found = optimize.minimize_scalar(
            lambda t: _fit_at(theta, backbone, free_length, unit, t)[1],
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        t_star = float(found.x) if found.fun <= sses[k] else float(candidates[k])
    else:
        t_star = float(candidates[k])

    (ei_pre, ei_post), sse = _fit_at(theta, backbone, free_length, unit, t_star)
    if not (0 <= ei_pre <= ei_post):
        log.info("two-regime fit rejected (EI_pre=%g, EI_post=%g)", ei_pre, ei_post)
        return result
    return FitResult(float(ei_pre), float(ei_post), t_star, friction, math.sqrt(sse / theta.size))


# --------------------------------------------------------------------------
# Synthetic bench data
# --------------------------------------------------------------------------

def load_point_displacement(theta, free_length, load_height):
    """Crosshead travel at which the attachment, tilted by ``theta``, meets height ``h``."""
    axial, transverse = mechanism.tip_position(theta, free_length)
    return transverse + (load_height - axial) * math.tan(theta)


def synthesize_bend_test(spec, theta_grid, load_height=0.12, friction=0.0,
                         noise=0.0, seed=None, dt=0.05):
    """Generate a loading/unloading cycle from the forward model.

    The loading branch follows ``M + friction`` up the grid, the unloading
    branch ``M - friction`` back down; ``noise`` is a relative Gaussian
    perturbation of the force.  Forces are clipped at zero, so grids
    where ``M < friction`` bias the friction estimate low.
    """
    theta = np.asarray(theta_grid, dtype=float)
    curve = mechanism.moment_curve(spec, theta)
    rng = np.random.default_rng(seed)

    up = theta
    down = theta[::-1]
    angle = np.concatenate([up, down])
    moment = np.concatenate([curve.moment + friction, curve.moment[::-1] - friction])
    branch = np.array([LOAD] * up.size + [UNLOAD] * down.size, dtype=object)

    disp = np.array([load_point_displacement(t, spec.free_length, load_height) for t in angle])
    lever = lever_arm(disp, angle, load_height)
    force = moment / lever
    if noise:
        force = force * (1.0 + noise * rng.standard_normal(force.size))
    force = np.clip(force, 0.0, None)
    time = dt * np.arange(angle.size)
    return BendTestTrace(time, force, disp, angle, branch)


def branches(trace, load_height):
    """Split a trace into ``((angle, moment) loading, (angle, moment) unloading)``."""
    angle, moment = compute_base_moment(trace, load_height)
    load = trace.branch == LOAD
    return (angle[load], moment[load]), (angle[~load], moment[~load])
