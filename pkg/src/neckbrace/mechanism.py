"""Large-deflection bar model and bar-array stiffness modes.

A single bar of the actuator is a cantilever loaded at its free end by a force
perpendicular to its undeformed axis.  For a tip slope ``theta`` the elastica
gives the base moment

    M_B(theta) = Gamma(theta) * E * I_eq * sqrt(sin(theta)) / L,
    Gamma(theta) = integral_0^theta dgamma / sqrt(sin(theta) - sin(gamma)),

which reduces to the linear-beam value ``2 E I theta / L`` for small angles.
The array of seven bars either bends as seven parallel bars (Base mode, gap
``inf``) or, once the central bar's lower end hits its stop, as four free bars
plus a three-bar composite section (Loaded mode, gap ``0``).  A finite positive
gap switches from the first response to the second at the angle where the
bar's end shortening closes the gap; a negative gap preloads the Loaded mode.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import DomainError, UnsupportedConfigurationError

__all__ = [
    "THETA_MAX",
    "BarArraySpec",
    "Branch",
    "GapControlled",
    "MomentCurve",
    "StiffnessMode",
    "adaptive_gauss_legendre",
    "bar_area",
    "base_moment",
    "end_shortening",
    "equivalent_inertia",
    "gamma",
    "inertia_single",
    "moment_curve",
    "preload_offset",
    "preload_angle",
    "tip_position",
    "transition_angle",
    "unit_moment",
]

#: Upper end of the modelled bending range (85 degrees).
THETA_MAX = math.radians(85.0)

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_QUAD_RTOL = 1e-12
_ROOT_XTOL = 1e-10


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

def _gl_panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def adaptive_gauss_legendre(f, a, b, rtol=_QUAD_RTOL, max_panels=4096):
    """Integrate a vectorised function with adaptively bisected GL panels.

    Each panel is integrated with a fixed 16-point Gauss-Legendre rule and
    compared with the sum over its two halves; panels whose difference
    exceeds their share of ``rtol * |total|`` are split again.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(x: ndarray) -> ndarray``.
    a, b : float
        Integration limits.
    rtol : float, optional
        Target relative tolerance of the total.
    max_panels : int, optional
        Hard cap on the number of accepted panels.

    Returns
    -------
    float
        The integral estimate.
    """
    if b == a:
        return 0.0
    length = b - a
    whole = _gl_panel(f, a, b)
    stack = [(a, b, whole)]
    total = 0.0
    accepted = 0
    scale = abs(whole)
    while stack:
        lo, hi, estimate = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl_panel(f, lo, mid)
        right = _gl_panel(f, mid, hi)
        refined = left + right
        share = rtol * max(scale, abs(refined)) * (hi - lo) / length
        if abs(refined - estimate) <= share or accepted + len(stack) >= max_panels:
            total += refined
            accepted += 1
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    return total


def _check_angle(theta):
    theta = float(theta)
    if not (0.0 <= theta < 0.5 * math.pi) or math.isnan(theta):
        raise DomainError(f"bending angle must lie in [0, pi/2), got {theta!r}")
    return theta


def _singular_integral(theta, weight):
    """Return ``integral_0^theta weight(g) / sqrt(sin(theta) - sin(g)) dg``.

    The substitution ``g = theta - u**2`` turns the inverse-square-root
    endpoint singularity into a bounded integrand.  The difference of sines
    is evaluated as a product to avoid cancellation near the endpoint.
    """
    if theta == 0.0:
        return 0.0

    def integrand(u):
        half_sq = 0.5 * u * u
        diff = 2.0 * np.cos(theta - half_sq) * np.sin(half_sq)
        return 2.0 * u * weight(theta - u * u) / np.sqrt(diff)

    return adaptive_gauss_legendre(integrand, 0.0, math.sqrt(theta))


@lru_cache(maxsize=8192)
def _gamma_cached(theta):
    return _singular_integral(theta, np.ones_like)


def gamma(theta):
    """Elastica integral ``Gamma(theta)`` for a tip slope ``theta`` [rad].

    Strictly increasing on ``[0, pi/2)`` and divergent at ``pi/2``;
    ``Gamma(theta) ~ 2 sqrt(theta)`` for small angles.
    """
    return _gamma_cached(_check_angle(theta))


def unit_moment(theta, free_length):
    """Base moment per unit bending stiffness, ``Gamma sqrt(sin theta) / L``."""
    theta = _check_angle(theta)
    if free_length <= 0:
        raise DomainError("free_length must be positive")
    return gamma(theta) * math.sqrt(math.sin(theta)) / free_length


def base_moment(theta, bending_stiffness, free_length):
    """Base moment [N m] of a bar (or ideal bar) of stiffness ``E*I_eq``.

    Parameters
    ----------
    theta : float
        Tip slope [rad], ``0 <= theta < pi/2``.
    bending_stiffness : float
        ``E * I_eq`` [N m^2], positive.
    free_length : float
        Free length ``L`` [m], positive.
    """
    if bending_stiffness <= 0:
        raise DomainError("bending_stiffness must be positive")
    return bending_stiffness * unit_moment(theta, free_length)


def end_shortening(theta, free_length):
    """Axial travel of the bar tip, ``L (1 - 2 sqrt(sin theta) / Gamma)``."""
    theta = _check_angle(theta)
    if free_length <= 0:
        raise DomainError("free_length must be positive")
    if theta == 0.0:
        return 0.0
    return free_length * (1.0 - 2.0 * math.sqrt(math.sin(theta)) / gamma(theta))


def tip_position(theta, free_length):
    """Tip coordinates ``(axial, transverse)`` [m] relative to the clamped end."""
    theta = _check_angle(theta)
    if theta == 0.0:
        return float(free_length), 0.0
    g = gamma(theta)
    axial = 2.0 * free_length * math.sqrt(math.sin(theta)) / g
    transverse = free_length / g * _singular_integral(theta, np.sin)
    return axial, transverse


# --------------------------------------------------------------------------
# Cross sections
# --------------------------------------------------------------------------

def inertia_single(diameter):
    """Second moment of area of a solid circular bar, ``pi d^4 / 64``."""
    if diameter < 0:
        raise DomainError("diameter must be non-negative")
    return math.pi * diameter ** 4 / 64.0


def bar_area(diameter):
    if diameter < 0:
        raise DomainError("diameter must be non-negative")
    return math.pi * diameter ** 2 / 4.0


class StiffnessMode(enum.Enum):
    BASE = "base"
    LOADED = "loaded"


@dataclass(frozen=True)
class GapControlled:
    """Mode selected by a gap value; only the two limits have a single ``I_eq``."""

    gap: float

    def resolve(self):
        if math.isinf(self.gap) and self.gap > 0:
            return StiffnessMode.BASE
        if self.gap == 0.0:
            return StiffnessMode.LOADED
        raise UnsupportedConfigurationError(
            f"gap {self.gap!r} has no single equivalent inertia; use moment_curve"
        )


@dataclass(frozen=True)
class BarArraySpec:
    """Geometry and material of the bar array (SI units).

    ``gap`` is the clearance below the central bar: ``inf`` selects the Base
    mode, ``0`` the Loaded mode and negative values a preloaded Loaded mode.
    Defaults are the prototype values; ``youngs_modulus`` and
    ``triad_separation`` are assumed, not measured.
    """

    bar_diameter: float = 1.5e-3
    free_length: float = 80e-3
    youngs_modulus: float = 130e9
    bar_count: int = 7
    coupled_count: int = 3
    triad_separation: float = 4.5e-3
    gap: float = math.inf

    def __post_init__(self):
        if not self.bar_diameter > 0:
            raise DomainError("bar_diameter must be positive")
        if not self.free_length > 0:
            raise DomainError("free_length must be positive")
        if not self.youngs_modulus > 0:
            raise DomainError("youngs_modulus must be positive")
        if not 0 <= self.coupled_count <= self.bar_count:
            raise DomainError("need 0 <= coupled_count <= bar_count")
        if not self.triad_separation >= 0:
            raise DomainError("triad_separation must be non-negative")
        if math.isnan(self.gap) or self.gap == -math.inf:
            raise DomainError("gap must be a finite number or +inf")

    def with_gap(self, gap):
        return dataclasses.replace(self, gap=float(gap))

    def stiffness(self, mode):
        """Bending stiffness ``E * I_eq`` [N m^2] of a mode."""
        return self.youngs_modulus * equivalent_inertia(self, mode)


def equivalent_inertia(spec, mode):
    """Equivalent second moment ``I_eq`` [m^4] of the array in a mode.

    Base: all ``n_b`` bars in parallel.  Loaded: ``n_b - n_c`` free bars plus
    the coupled triad, whose inertia carries the parallel-axis term
    ``D_b^2 * S_b * 2/3``.
    """
    if isinstance(mode, GapControlled):
        mode = mode.resolve()
    single = inertia_single(spec.bar_diameter)
    if mode is StiffnessMode.BASE:
        return spec.bar_count * single
    if mode is StiffnessMode.LOADED:
        if spec.coupled_count != 3:
            raise UnsupportedConfigurationError(
                f"Loaded mode needs a coupled triad, got coupled_count={spec.coupled_count}"
            )
        triad = (
            spec.triad_separation ** 2 * bar_area(spec.bar_diameter) * 2.0 / 3.0
            + spec.coupled_count * single
        )
        return (spec.bar_count - spec.coupled_count) * single + triad
    raise TypeError(f"unknown stiffness mode {mode!r}")


# --------------------------------------------------------------------------
# Mode transition
# --------------------------------------------------------------------------

def _max_shortening(free_length):
    return end_shortening(THETA_MAX, free_length)


def _solve_shortening(travel, free_length):
    # Delta is strictly increasing on (0, THETA_MAX]; bisection is derivative-free.
    return optimize.bisect(
        lambda t: end_shortening(t, free_length) - travel,
        0.0,
        THETA_MAX,
        xtol=_ROOT_XTOL,
        rtol=4 * np.finfo(float).eps,
        maxiter=200,
    )


def transition_angle(spec):
    """Bending angle [rad] at which the gap closes, or ``None``.

    ``None`` for the Base mode and for gaps larger than the end shortening
    reached at 85 degrees.  Non-positive gaps transition at ``0``.
    """
    gap = spec.gap
    if math.isinf(gap):
        return None
    if gap <= 0.0:
        return 0.0
    if gap >= _max_shortening(spec.free_length):
        return None
    return _solve_shortening(gap, spec.free_length)


def preload_angle(spec):
    """Equivalent bending angle whose end shortening equals ``|gap|``."""
    if not spec.gap < 0:
        raise DomainError("preload requires a negative gap")
    travel = -spec.gap
    if travel >= _max_shortening(spec.free_length):
        raise DomainError(
            f"preload {travel:.4g} m exceeds the achievable end shortening"
        )
    return _solve_shortening(travel, spec.free_length)


def preload_offset(spec):
    """Constant moment [N m] added to the Loaded response by a negative gap."""
    theta_pre = preload_angle(spec)
    if theta_pre == 0.0:
        return 0.0
    return spec.stiffness(StiffnessMode.LOADED) * unit_moment(theta_pre, spec.free_length)


class Branch(str, enum.Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class MomentCurve:
    """Sampled base-moment response of the array.

    ``branch`` labels each sample as before or after the mode transition;
    ``transition_angle`` is ``None`` when no transition happens in range.
    """

    theta: np.ndarray
    moment: np.ndarray
    branch: tuple
    transition_angle: Optional[float]

    def __len__(self):
        return len(self.theta)

    def samples(self):
        return list(zip(self.theta.tolist(), self.moment.tolist(), self.branch))


def moment_curve(spec, theta_grid):
    """Compose the Base/Loaded responses into the gap-controlled curve.

    Below the transition angle the Base response applies.  Beyond it the
    Loaded response is shifted so the curve stays continuous:
    ``M = M_BS(t*) + M_LS(theta) - M_LS(t*)``.  Negative gaps give the
    Loaded response plus :func:`preload_offset` everywhere.

    Parameters
    ----------
    spec : BarArraySpec
    theta_grid : sequence of float
        Strictly increasing angles [rad] in ``[0, 85 deg]``.

    Returns
    -------
    MomentCurve
    """
    theta = np.asarray(theta_grid, dtype=float)
    if theta.ndim != 1 or theta.size == 0:
        raise DomainError("theta_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(theta) <= 0):
        raise DomainError("theta_grid must be strictly increasing")
    if theta[0] < 0 or theta[-1] > THETA_MAX + 1e-12:
        raise DomainError("theta_grid must lie within [0, 85 deg]")

    unit = np.array([unit_moment(t, spec.free_length) for t in theta])
    ei_base = spec.stiffness(StiffnessMode.BASE)

    t_star = transition_angle(spec)
    if t_star is None:
        return MomentCurve(theta, ei_base * unit, (Branch.PRE,) * theta.size, None)

    ei_loaded = spec.stiffness(StiffnessMode.LOADED)
    if spec.gap < 0:
        moment = ei_loaded * unit + preload_offset(spec)
        return MomentCurve(theta, moment, (Branch.POST,) * theta.size, 0.0)

    unit_star = unit_moment(t_star, spec.free_length)
    post = theta >= t_star
    moment = np.where(
        post,
        ei_base * unit_star + ei_loaded * (unit - unit_star),
        ei_base * unit,
    )
    branch = tuple(Branch.POST if p else Branch.PRE for p in post)
    return MomentCurve(theta, moment, branch, t_star)
