from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import DomainError

EMG_CHANNELS = ("scm_left", "scm_right", "spl_left", "spl_right")
KIN_CHANNELS = ("roll", "pitch", "yaw")
ACTIVITY_COLUMNS = ["participant", "condition", "muscle", "posture_plane", "posture_deg", "activity_norm"]


@dataclass
class SignalTrace:
    """Uniformly sampled multichannel series starting at ``t = 0``."""

    sample_rate: float
    channels: Dict[str, np.ndarray]

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise DomainError("sample_rate must be positive")
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        lengths = {v.size for v in self.channels.values()}
        if len(lengths) > 1:
            raise DomainError("all channels must have equal length")
        for name, values in self.channels.items():
            if values.ndim != 1:
                raise DomainError(f"channel {name!r} must be one-dimensional")
            if not np.all(np.isfinite(values)):
                raise DomainError(f"channel {name!r} contains non-finite values")

    def __len__(self):
        return next(iter(self.channels.values())).size if self.channels else 0

    def __getitem__(self, name):
        return self.channels[name]

    @property
    def names(self):
        return tuple(self.channels)

    @property
    def time(self):
        return np.arange(len(self)) / self.sample_rate

    def index_at(self, t):
        """Nearest sample index for time ``t`` [s], clipped to the trace."""
        return int(np.clip(round(t * self.sample_rate), 0, len(self)))

    def map(self, func):
        return SignalTrace(self.sample_rate, {k: func(v) for k, v in self.channels.items()})
