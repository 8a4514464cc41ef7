"""EMG envelope pipeline, phase segmentation and activity normalization.

Envelope chain per channel: mean removal, zero-phase Butterworth band-pass
(15-400 Hz), full-wave rectification and a centred 250 ms moving average
that is truncated (not padded) at the trace edges.

Segmentation works on the head angle of each posture's plane (pitch for
sagittal, yaw for transverse, roll for coronal).  A hold is a run of at least
3 s within 5 deg of the target, trimmed to where the smoothed angular speed
has settled.  The approach starts when the angle leaves the +-3 deg neutral
band and the recovery ends when it re-enters it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from .errors import ConfigurationError, NormalizationError, SegmentationError
from .protocol import PostureTarget
from .signals import ACTIVITY_COLUMNS, SignalTrace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    band: Tuple[float, float] = (15.0, 400.0)
    filter_order: int = 4
    window: float = 0.25

    def metadata(self):
        meta = asdict(self)
        meta.update(filter="butterworth", zero_phase=True, normalization_source="envelope")
        return meta


def moving_average(x, width):
    """Centred moving mean over ``width`` samples, truncated at the edges."""
    x = np.asarray(x, dtype=float)
    n = x.size
    half = max(int(width) // 2, 0)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(n)
    lo = np.clip(idx - half, 0, n)
    hi = np.clip(idx + half + 1, 0, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def bandpass_sos(sample_rate, config=PipelineConfig()):
    low, high = config.band
    if not sample_rate > 2.0 * high:
        raise ConfigurationError(
            f"sample rate {sample_rate} Hz cannot support a {high} Hz band edge"
        )
    return signal.butter(config.filter_order, [low, high], btype="bandpass", fs=sample_rate, output="sos")


def preprocess(raw, config=PipelineConfig()):
    """Return the activation envelope of every channel of ``raw``."""
    sos = bandpass_sos(raw.sample_rate, config)
    width = int(round(config.window * raw.sample_rate))

    def envelope(x):
        filtered = signal.sosfiltfilt(sos, x - x.mean())
        return moving_average(np.abs(filtered), width)

    return raw.map(envelope)


# --------------------------------------------------------------------------
# Segmentation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentationConfig:
    hold_tolerance: float = 5.0  # deg
    min_hold: float = 3.0  # s
    neutral_band: float = 3.0  # deg
    settle_speed: float = 1.0  # deg/s
    smoothing: float = 0.25  # s
    max_unmatched_fraction: float = 0.2


@dataclass(frozen=True)
class CycleSegment:
    """Sample intervals ``[start, end)`` of the three phases of one cycle."""

    index: int
    target: PostureTarget
    approach: Tuple[int, int]
    hold: Tuple[int, int]
    recovery: Tuple[int, int]

    @property
    def span(self):
        return self.approach[0], self.recovery[1]


@dataclass
class PhaseSegmentation:
    sample_rate: float
    cycles: List[CycleSegment]
    unmatched: List[Tuple[int, PostureTarget]] = field(default_factory=list)

    def times(self, interval):
        return interval[0] / self.sample_rate, interval[1] / self.sample_rate

    def hold_times(self):
        return [self.times(c.hold) for c in self.cycles]


def _runs(mask):
    """``(start, end)`` pairs of the True runs of a boolean array."""
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2], edges[1::2]))


def segment(kin, sequence, config=SegmentationConfig()):
    """Locate each posture of ``sequence`` in the kinematics, in order.

    Parameters
    ----------
    kin : SignalTrace
        ``roll``, ``pitch`` and ``yaw`` in radians.
    sequence : sequence of PostureTarget
    config : SegmentationConfig

    Returns
    -------
    PhaseSegmentation

    Raises
    ------
    SegmentationError
        When more than ``max_unmatched_fraction`` of the postures are missing.
    """
    fs = kin.sample_rate
    degrees = {k: np.degrees(v) for k, v in kin.channels.items()}
    width = max(int(round(config.smoothing * fs)), 1)
    speed = {k: np.abs(np.gradient(moving_average(v, width))) * fs for k, v in degrees.items()}
    min_len = int(math.ceil(config.min_hold * fs))
    n = len(kin)

    cycles, unmatched = [], []
    cursor = 0
    for k, target in enumerate(sequence):
        angle = degrees[target.channel]
        near = np.abs(angle[cursor:] - target.angle) < config.hold_tolerance
        run = next(((cursor + a, cursor + b) for a, b in _runs(near) if b - a >= min_len), None)
        if run is None:
            unmatched.append((k, target))
            continue
        r0, r1 = run
        settled = np.flatnonzero(speed[target.channel][r0:r1] < config.settle_speed)
        h0, h1 = (r0 + settled[0], r0 + settled[-1] + 1) if settled.size else (r0, r1)

        neutral = np.abs(angle) < config.neutral_band
        before = np.flatnonzero(neutral[cursor:h0])
        a0 = cursor + before[-1] + 1 if before.size else cursor
        after = np.flatnonzero(neutral[h1:])
        e1 = h1 + after[0] if after.size else n
        cycles.append(CycleSegment(k, target, (a0, h0), (h0, h1), (h1, e1)))
        cursor = e1

    if sequence and len(unmatched) > config.max_unmatched_fraction * len(sequence):
        raise SegmentationError(
            f"{len(unmatched)} of {len(sequence)} postures could not be located"
        )
    for k, target in unmatched:
        log.warning("posture %d (%s) unmatched", k, target.label())
    return PhaseSegmentation(fs, cycles, unmatched)


# --------------------------------------------------------------------------
# Means and normalization
# --------------------------------------------------------------------------

@dataclass
class HoldingMeans:
    values: Dict[Tuple[str, PostureTarget], float]
    flagged: List[Tuple[int, PostureTarget]] = field(default_factory=list)


def _emg_slice(envelope, seg, interval):
    t0, t1 = seg.times(interval)
    return slice(envelope.index_at(t0), envelope.index_at(t1))


def holding_means(envelope, seg):
    """Mean envelope over the hold phase per (muscle, posture).

    Repetitions of a posture are averaged with equal weight.  Cycles whose
    hold maps to no envelope samples are skipped and flagged.
    """
    per_cycle = {}
    flagged = []
    for cycle in seg.cycles:
        window = _emg_slice(envelope, seg, cycle.hold)
        if window.stop <= window.start:
            flagged.append((cycle.index, cycle.target))
            continue
        for muscle, values in envelope.channels.items():
            per_cycle.setdefault((muscle, cycle.target), []).append(float(values[window].mean()))
    means = {key: float(np.mean(v)) for key, v in per_cycle.items()}
    return HoldingMeans(means, flagged)


def rotation_reference(sessions):
    """Per-muscle maximum envelope over all transverse-plane cycles.

    Parameters
    ----------
    sessions : iterable of (SignalTrace, PhaseSegmentation)
        Envelope and segmentation of every session of one participant.
    """
    reference = {}
    found = False
    for envelope, seg in sessions:
        for cycle in seg.cycles:
            if not cycle.target.is_rotation:
                continue
            window = _emg_slice(envelope, seg, cycle.span)
            if window.stop <= window.start:
                continue
            found = True
            for muscle, values in envelope.channels.items():
                peak = float(values[window].max())
                reference[muscle] = max(reference.get(muscle, 0.0), peak)
    if not found:
        raise NormalizationError("no rotation cycle available for normalization")
    return reference


def normalize(means, envelope=None, seg=None, *, participant, condition, reference=None):
    """Divide holding means by the rotation reference.

    Either pass ``reference`` (shared across the participant's sessions, see
    :func:`rotation_reference`) or the session's ``envelope`` and ``seg``.

    Returns
    -------
    pandas.DataFrame
        An activity table with :data:`ACTIVITY_COLUMNS`.
    """
    if isinstance(means, HoldingMeans):
        means = means.values
    if reference is None:
        if envelope is None or seg is None:
            raise NormalizationError("need a reference or the envelope and segmentation")
        reference = rotation_reference([(envelope, seg)])
    rows = []
    for (muscle, target), value in sorted(means.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        ref = reference.get(muscle, 0.0)
        if not ref > 0:
            raise NormalizationError(f"zero normalization reference for {muscle}")
        rows.append((participant, condition, muscle, target.plane, float(target.angle), value / ref))
    return pd.DataFrame(rows, columns=ACTIVITY_COLUMNS)


@dataclass
class Session:
    condition: str
    emg: SignalTrace
    kinematics: SignalTrace
    sequence: Sequence[PostureTarget]


def process_participant(sessions, participant, pipeline=PipelineConfig(), segmentation=SegmentationConfig()):
    """Run envelope, segmentation and normalization over one participant's sessions.

    All sessions share the rotation reference, so the conditions are directly
    comparable.
    """
    staged = []
    for s in sessions:
        env = preprocess(s.emg, pipeline)
        seg = segment(s.kinematics, s.sequence, segmentation)
        staged.append((s.condition, env, seg, holding_means(env, seg)))
    reference = rotation_reference([(env, seg) for _, env, seg, _ in staged])
    tables = [
        normalize(means, participant=participant, condition=cond, reference=reference)
        for cond, _, _, means in staged
    ]
    return pd.concat(tables, ignore_index=True)
