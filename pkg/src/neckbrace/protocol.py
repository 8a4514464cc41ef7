"""Trial sequences and synthetic ground-truth recordings.

A session is 24 motion cycles (12 postures, each twice, randomly ordered).
Each cycle is a neutral dwell, an approach ramp, a hold at the target and a
recovery ramp back to neutral.  :func:`synth_trial` turns a plan into
kinematics and four-channel EMG with a known envelope, which the emg and
stats modules are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DomainError
from .signals import ACTIVITY_COLUMNS, EMG_CHANNELS, SignalTrace

PLANES = ("sagittal", "transverse", "coronal")
PLANE_ANGLE = {"sagittal": "pitch", "transverse": "yaw", "coronal": "roll"}
CONDITIONS = ("base", "loaded")

NEUTRAL_DWELL = 3.0
HOLD = 10.0
RAMP = 2.0


@dataclass(frozen=True, order=True)
class PostureTarget:
    plane: str
    angle: float  # degrees, signed

    def __post_init__(self):
        if self.plane not in PLANES:
            raise DomainError(f"unknown plane {self.plane!r}")
        if abs(self.angle) not in ALLOWED_MAGNITUDES[self.plane]:
            raise DomainError(f"{self.angle} deg is not a {self.plane} protocol posture")

    @property
    def channel(self):
        """Kinematic channel that carries this plane's angle."""
        return PLANE_ANGLE[self.plane]

    @property
    def is_rotation(self):
        return self.plane == "transverse"

    def label(self):
        return f"{self.plane}{self.angle:+g}"


ALLOWED_MAGNITUDES = {
    "sagittal": (15.0, 40.0),
    "transverse": (15.0, 30.0),
    "coronal": (15.0, 40.0),
}

POSTURES = tuple(
    PostureTarget(plane, sign * mag)
    for plane in PLANES
    for mag in ALLOWED_MAGNITUDES[plane]
    for sign in (1, -1)
)
BACKWARD_40 = PostureTarget("sagittal", -40.0)


@dataclass(frozen=True)
class Cycle:
    target: PostureTarget
    t_start: float
    neutral_dwell: float = NEUTRAL_DWELL
    approach: float = RAMP
    hold: float = HOLD
    recovery: float = RAMP

    @property
    def t_hold_start(self):
        return self.t_start + self.neutral_dwell + self.approach

    @property
    def t_hold_end(self):
        return self.t_hold_start + self.hold

    @property
    def t_end(self):
        return self.t_hold_end + self.recovery


@dataclass(frozen=True)
class TrialPlan:
    cycles: Tuple[Cycle, ...]
    seed: Optional[int] = None
    tail: float = NEUTRAL_DWELL

    @property
    def duration(self):
        return self.cycles[-1].t_end + self.tail if self.cycles else 0.0

    @property
    def sequence(self):
        return [c.target for c in self.cycles]


def plan_from_targets(targets, seed=None, approach=RAMP, recovery=RAMP,
                      neutral_dwell=NEUTRAL_DWELL, hold=HOLD):
    cycles = []
    t = 0.0
    for target in targets:
        cycle = Cycle(target, t, neutral_dwell, approach, hold, recovery)
        cycles.append(cycle)
        t = cycle.t_end
    return TrialPlan(tuple(cycles), seed)


def generate_sequence(seed=None, repetitions=2):
    """Randomly ordered plan with every protocol posture ``repetitions`` times."""
    rng = np.random.default_rng(seed)
    pool = [p for p in POSTURES for _ in range(repetitions)]
    order = rng.permutation(len(pool))
    return plan_from_targets([pool[i] for i in order], seed=seed)


# --------------------------------------------------------------------------
# Synthetic recordings
# --------------------------------------------------------------------------

def min_jerk(s):
    """Minimum-jerk position profile on ``[0, 1]``."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def _cycle_profile(t, cycle, level):
    """Piecewise 0 -> level -> 0 profile of one cycle sampled at times ``t``."""
    out = np.zeros_like(t)
    a0 = cycle.t_start + cycle.neutral_dwell
    up = (t >= a0) & (t < cycle.t_hold_start)
    out[up] = level * min_jerk((t[up] - a0) / cycle.approach)
    hold = (t >= cycle.t_hold_start) & (t < cycle.t_hold_end)
    out[hold] = level
    down = (t >= cycle.t_hold_end) & (t < cycle.t_end)
    out[down] = level * (1.0 - min_jerk((t[down] - cycle.t_hold_end) / cycle.recovery))
    return out


@dataclass
class ActivationProfile:
    """Ground-truth EMG envelope amplitude per muscle, condition and posture.

    ``levels`` maps ``(muscle, condition, PostureTarget)`` to the hold-phase
    amplitude; missing keys fall back to ``default``.  ``rest`` is the
    amplitude in neutral posture.
    """

    levels: Dict[tuple, float] = field(default_factory=dict)
    default: float = 0.2
    rest: float = 0.05

    def amplitude(self, muscle, condition, target):
        return self.levels.get((muscle, condition, target), self.default)

    def scaled(self, factor):
        return ActivationProfile(
            {k: v * factor for k, v in self.levels.items()},
            self.default * factor,
            self.rest * factor,
        )

    @classmethod
    def zero(cls):
        return cls({}, 0.0, 0.0)


def band_limited_noise(n, sample_rate, rng, band=(40.0, 250.0)):
    """Gaussian noise confined to ``band`` [Hz], scaled so ``E|x| = 1``."""
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spectrum[(freqs < band[0]) | (freqs > band[1])] = 0.0
    x = np.fft.irfft(spectrum, n)
    # E|x| = sigma * sqrt(2/pi) for a Gaussian
    return x * math.sqrt(0.5 * math.pi) / x.std()


@dataclass
class GroundTruth:
    plan: TrialPlan
    condition: str
    hold_intervals: List[Tuple[float, float]]
    hold_amplitude: Dict[Tuple[str, PostureTarget], float]
    envelope: Dict[str, np.ndarray]


def synth_trial(plan, activation_profile, noise_seed=None, condition="base",
                kin_rate=100.0, emg_rate=2000.0, reach=1.0, kin_noise_deg=0.0):
    """Synthesize kinematics and EMG for one session.

    Parameters
    ----------
    plan : TrialPlan
    activation_profile : ActivationProfile
    noise_seed : int, optional
        Seed of the EMG carrier (and optional kinematic) noise.
    condition : {"base", "loaded"}
    kin_rate, emg_rate : float
        Sample rates [Hz].
    reach : float
        Fraction of each target actually reached; values above 1 overshoot.
    kin_noise_deg : float
        Standard deviation of white noise added to the angles [deg].

    Returns
    -------
    kinematics : SignalTrace
        ``roll``, ``pitch``, ``yaw`` in radians.
    emg : SignalTrace
        Four channels in volts-like units.
    truth : GroundTruth
    """
    if condition not in CONDITIONS:
        raise DomainError(f"condition must be one of {CONDITIONS}")
    rng = np.random.default_rng(noise_seed)
    duration = plan.duration

    t_kin = np.arange(int(round(duration * kin_rate))) / kin_rate
    angles = {"roll": np.zeros_like(t_kin), "pitch": np.zeros_like(t_kin), "yaw": np.zeros_like(t_kin)}
    for cycle in plan.cycles:
        target = math.radians(cycle.target.angle) * reach
        angles[cycle.target.channel] += _cycle_profile(t_kin, cycle, target)
    if kin_noise_deg:
        for key in angles:
            angles[key] = angles[key] + math.radians(kin_noise_deg) * rng.standard_normal(t_kin.size)
    kinematics = SignalTrace(kin_rate, angles)

    t_emg = np.arange(int(round(duration * emg_rate))) / emg_rate
    envelope = {}
    emg = {}
    hold_amplitude = {}
    for muscle in EMG_CHANNELS:
        env = np.full_like(t_emg, activation_profile.rest)
        for cycle in plan.cycles:
            level = activation_profile.amplitude(muscle, condition, cycle.target)
            hold_amplitude[(muscle, cycle.target)] = level
            env += _cycle_profile(t_emg, cycle, level - activation_profile.rest)
        envelope[muscle] = env
        emg[muscle] = env * band_limited_noise(t_emg.size, emg_rate, rng)
    truth = GroundTruth(
        plan,
        condition,
        [(c.t_hold_start, c.t_hold_end) for c in plan.cycles],
        hold_amplitude,
        envelope,
    )
    return kinematics, SignalTrace(emg_rate, emg), truth


def forward_flexion(target):
    return target.plane == "sagittal" and target.angle > 0


def synth_activity_table(n_participants=8, seed=None, spl_flexion_ratio=0.6,
                         between_sd=0.3, session_sd=0.1, postures=POSTURES):
    """Normalized activity table drawn directly from a multiplicative model.

    Every participant has a log-normal level per (muscle, posture); each
    session multiplies it by independent log-normal noise.  The only imposed
    condition effect is ``spl_flexion_ratio`` on both SPL channels during
    forward sagittal flexion under the Loaded condition.  This skips signal
    synthesis, so many replicate studies are cheap.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for p in range(n_participants):
        pid = f"P{p + 1:02d}"
        for muscle in EMG_CHANNELS:
            for target in postures:
                level = 0.3 * math.exp(between_sd * rng.standard_normal())
                for condition in CONDITIONS:
                    effect = 1.0
                    if condition == "loaded" and muscle.startswith("spl") and forward_flexion(target):
                        effect = spl_flexion_ratio
                    value = level * effect * math.exp(session_sd * rng.standard_normal())
                    rows.append((pid, condition, muscle, target.plane, float(target.angle), value))
    return pd.DataFrame(rows, columns=ACTIVITY_COLUMNS)
