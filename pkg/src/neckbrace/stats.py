"""Paired Wilcoxon signed-rank test and Base/Loaded comparison tables."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats as sps

from .errors import UndefinedTestError

log = logging.getLogger(__name__)

EXACT_MAX_N = 25
ALPHA = 0.05
COMPARISON_COLUMNS = [
    "muscle", "posture_plane", "posture_deg",
    "mean_base", "sd_base", "mean_loaded", "sd_loaded",
    "W", "p_value", "significant_05",
]


@dataclass(frozen=True)
class PairedSample:
    base: np.ndarray
    loaded: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        loaded = np.asarray(self.loaded, dtype=float)
        if base.shape != loaded.shape or base.ndim != 1 or base.size < 1:
            raise ValueError("need two equal-length, non-empty 1-D samples")
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(loaded))):
            raise ValueError("paired values must be finite")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "loaded", loaded)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def differences(self):
        return self.loaded - self.base


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n_effective: int
    method: str


def signed_ranks(differences):
    """Drop zero differences and return (mid-ranks of |d|, positive mask)."""
    d = np.asarray(differences, dtype=float)
    d = d[d != 0]
    return sps.rankdata(np.abs(d)), d > 0


def rank_sum_counts(doubled_ranks):
    """Number of sign assignments giving each value of the doubled rank sum.

    ``doubled_ranks`` are ``2 * rank`` (integers even with mid-rank ties);
    ``counts[s]`` is the number of subsets whose doubled ranks sum to ``s``.
    """
    doubled_ranks = [int(r) for r in doubled_ranks]
    counts = np.zeros(sum(doubled_ranks) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    return counts


def _exact_p(ranks, w):
    doubled = np.rint(2 * ranks).astype(np.int64)
    counts = rank_sum_counts(doubled)
    s = int(round(2 * w))
    total = counts.sum()
    lower = counts[: s + 1].sum()
    upper = counts[s:].sum()
    return min(1.0, 2.0 * min(lower, upper) / total)


def _normal_p(ranks, w):
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
    if var <= 0:
        return 1.0
    delta = w - mean
    z = (abs(delta) - 0.5) / math.sqrt(var) if delta else 0.0
    return min(1.0, 2.0 * sps.norm.sf(max(z, 0.0)))


def wilcoxon_signed_rank(sample, method="auto"):
    """Two-sided Wilcoxon signed-rank test on ``loaded - base``.

    Zero differences are dropped and tied magnitudes get mid-ranks.  The
    p-value is exact (conditional on the tie pattern) for up to 25 non-zero
    pairs, computed from the rank-sum distribution by dynamic programming;
    larger samples use the normal approximation with tie and continuity
    corrections.

    Parameters
    ----------
    sample : PairedSample
    method : {"auto", "exact", "normal_approximation"}

    Returns
    -------
    WilcoxonResult
        ``statistic`` is the sum of ranks of positive differences.
    """
    ranks, positive = signed_ranks(sample.differences)
    n = ranks.size
    if n == 0:
        raise UndefinedTestError("all paired differences are zero")
    w = float(ranks[positive].sum())
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal_approximation"
    if method == "exact":
        p = _exact_p(ranks, w)
    elif method == "normal_approximation":
        p = _normal_p(ranks, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(w, float(p), n, method)


def compare_conditions(table, include_backward_40=False, alpha=ALPHA):
    """Wilcoxon comparison of Base vs Loaded for every (muscle, posture) cell.

    Participants missing either condition in a cell are dropped from that
    cell; a cell left with no complete pair is reported with ``note`` set.
    Cells whose paired differences are all zero get ``p_value = nan`` and are
    not significant.

    Parameters
    ----------
    table : pandas.DataFrame
        Activity table (see :data:`neckbrace.emg.ACTIVITY_COLUMNS`).
    include_backward_40 : bool
        Keep the -40 deg sagittal posture, which is excluded by default.
    """
    df = table.copy()
    if not include_backward_40:
        df = df[~((df.posture_plane == "sagittal") & (df.posture_deg == -40.0))]

    rows = []
    for (muscle, plane, deg), cell in df.groupby(["muscle", "posture_plane", "posture_deg"], sort=True):
        wide = cell.pivot_table(index="participant", columns="condition", values="activity_norm", aggfunc="mean")
        complete = wide.dropna()
        if "base" not in wide or "loaded" not in wide:
            complete = complete.iloc[0:0]
        dropped = len(wide) - len(complete)
        row = dict(muscle=muscle, posture_plane=plane, posture_deg=float(deg), n=len(complete))
        if len(complete) == 0:
            row.update(note="incomplete", W=np.nan, p_value=np.nan, significant_05=False,
                       mean_base=np.nan, sd_base=np.nan, mean_loaded=np.nan, sd_loaded=np.nan,
                       n_effective=0, method="")
            rows.append(row)
            continue
        base, loaded = complete["base"].to_numpy(), complete["loaded"].to_numpy()
        row.update(
            mean_base=base.mean(), sd_base=base.std(ddof=1) if base.size > 1 else 0.0,
            mean_loaded=loaded.mean(), sd_loaded=loaded.std(ddof=1) if loaded.size > 1 else 0.0,
            note=f"dropped {dropped} incomplete" if dropped else "",
        )
        try:
            res = wilcoxon_signed_rank(PairedSample(base, loaded))
        except UndefinedTestError:
            row.update(W=np.nan, p_value=np.nan, significant_05=False,
                       n_effective=0, method="", note="all differences zero")
        else:
            row.update(W=res.statistic, p_value=res.p_value, significant_05=bool(res.p_value < alpha),
                       n_effective=res.n_effective, method=res.method)
        if dropped:
            log.warning("%s %s %+g: %d participant(s) lack both conditions", muscle, plane, deg, dropped)
        rows.append(row)
    columns = COMPARISON_COLUMNS + ["n", "n_effective", "method", "note"]
    return pd.DataFrame(rows, columns=columns)
