"""Sagittal-plane statics of the head and the orthosis.

Coordinates: X points forward, Z up, moments are taken about the C7 joint and
are positive in the flexion sense (the sense in which gravity tips the head
forward).  The head inclination ``theta`` is positive for forward flexion; the
head-frame axes are ``X' = (cos t, -sin t)`` and ``Z' = (sin t, cos t)``.

The head centre of mass ``P_H`` rotates rigidly with the head about C7, the
actuator base ``P_B`` is fixed to the body.  The slider carries no load along
``Z'``, so the actuator base reacts only the ``X'`` component of the head
weight while the spine reacts the ``Z'`` component.  Summing moments about C7:

    MM = F_H x P_H - AM,        AM = BM - F_B x P_B

with ``MM`` the muscle (extensor-positive) moment, ``BM`` the actuator base
moment and ``AM`` the assistance it transfers to C7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError

DEFAULT_HEAD_WEIGHT = 50.0
# Illustrative adult levers [m] about C7; replace with subject measurements.
DEFAULT_COM_LEVER = (0.02, 0.15)
DEFAULT_BASE_LEVER = (-0.05, -0.03)


def moment_y(point, force):
    """Flexion-positive moment about the origin of ``force`` applied at ``point``."""
    return point[1] * force[0] - point[0] * force[1]


def rotate_with_head(vector, theta):
    """Rotate a sagittal vector forward by ``theta`` (head-fixed point)."""
    x, z = vector
    c, s = math.cos(theta), math.sin(theta)
    return (x * c + z * s, -x * s + z * c)


@dataclass(frozen=True)
class HeadStatics:
    """Head weight, levers about C7 and head inclination for one posture."""

    inclination: float
    head_weight: float = DEFAULT_HEAD_WEIGHT
    com_lever: tuple = DEFAULT_COM_LEVER
    base_lever: tuple = DEFAULT_BASE_LEVER

    def __post_init__(self):
        if not self.head_weight > 0:
            raise DomainError("head_weight must be positive")
        if not abs(self.inclination) < 0.5 * math.pi:
            raise DomainError("|inclination| must be below pi/2")
        levers = (*self.com_lever, *self.base_lever)
        if len(levers) != 4 or not all(math.isfinite(v) for v in levers):
            raise DomainError("levers must be finite 2-vectors")
        object.__setattr__(self, "com_lever", tuple(float(v) for v in self.com_lever))
        object.__setattr__(self, "base_lever", tuple(float(v) for v in self.base_lever))

    def at(self, inclination):
        return HeadStatics(inclination, self.head_weight, self.com_lever, self.base_lever)

    @property
    def weight_vector(self):
        return (0.0, -self.head_weight)

    @property
    def com_position(self):
        """Current head CoM position relative to C7."""
        return rotate_with_head(self.com_lever, self.inclination)

    @property
    def head_axes(self):
        c, s = math.cos(self.inclination), math.sin(self.inclination)
        return (c, -s), (s, c)


class StaticsResult(NamedTuple):
    muscle_moment: float
    assistive_moment: float
    base_moment: float
    base_force: float
    spine_force: float


def head_frame_forces(statics):
    """Magnitudes of the actuator-base and spine reactions ``(F_B, F_S)`` [N].

    ``F_B = F_H sin(theta)`` balances the head weight along ``X'`` and
    ``F_S = F_H cos(theta)`` along ``Z'``.
    """
    theta = statics.inclination
    return statics.head_weight * math.sin(theta), statics.head_weight * math.cos(theta)


def gravity_moment(statics):
    """``F_H x P_H``: moment of the head weight about C7."""
    return moment_y(statics.com_position, statics.weight_vector)


def base_force_moment(statics):
    """``F_B x P_B``: moment about C7 of the base reaction, acting at ``P_B``."""
    f_b, _ = head_frame_forces(statics)
    x_axis, _ = statics.head_axes
    force = (-f_b * x_axis[0], -f_b * x_axis[1])
    return moment_y(statics.base_lever, force)


def assistive_moment(statics, device_base_moment):
    return device_base_moment - base_force_moment(statics)


def muscle_moment(statics, device_base_moment):
    """Extensor moment the neck muscles must supply; negative means flexor effort."""
    return gravity_moment(statics) - assistive_moment(statics, device_base_moment)


def ideal_base_moment(statics):
    """Base moment that makes the muscle moment vanish."""
    return gravity_moment(statics) + base_force_moment(statics)


def solve_statics(statics, device_base_moment):
    f_b, f_s = head_frame_forces(statics)
    am = assistive_moment(statics, device_base_moment)
    mm = gravity_moment(statics) - am
    return StaticsResult(mm, am, float(device_base_moment), f_b, f_s)


@dataclass
class AssistProfile:
    """Device moment as a fraction of the ideal base moment along a sweep."""

    theta: np.ndarray
    fraction: np.ndarray
    excluded: np.ndarray
    peak: float
    peak_theta: Optional[float]


def assist_fraction(curve, statics_sweep):
    """Per-angle ratio ``M(theta) / BM_id(theta)`` and its maximum.

    Samples whose ideal moment is not positive are excluded (``nan`` in
    ``fraction`` and ``True`` in ``excluded``).

    Parameters
    ----------
    curve : MomentCurve
    statics_sweep : sequence of HeadStatics
        One entry per curve sample, with matching inclinations.
    """
    theta = np.asarray(curve.theta, dtype=float)
    if len(statics_sweep) != theta.size:
        raise DomainError("statics sweep and curve must have the same length")
    incl = np.array([s.inclination for s in statics_sweep])
    if not np.allclose(incl, theta, rtol=0, atol=1e-12):
        raise DomainError("statics sweep inclinations must match the curve angles")

    ideal = np.array([ideal_base_moment(s) for s in statics_sweep])
    excluded = ideal <= 0
    fraction = np.full(theta.size, np.nan)
    fraction[~excluded] = np.asarray(curve.moment)[~excluded] / ideal[~excluded]
    if np.all(excluded):
        return AssistProfile(theta, fraction, excluded, float("nan"), None)
    k = int(np.nanargmax(fraction))
    return AssistProfile(theta, fraction, excluded, float(fraction[k]), float(theta[k]))


def statics_sweep(theta, template=None):
    """HeadStatics for each inclination in ``theta``, sharing ``template`` levers."""
    template = template or HeadStatics(0.0)
    return [template.at(float(t)) for t in np.asarray(theta, dtype=float)]
