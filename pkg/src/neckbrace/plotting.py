"""Vector plot output.  Matplotlib is imported lazily with the Agg backend."""

from __future__ import annotations

import math
from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed ids keep the svg byte-identical between runs
    plt.rcParams["svg.hashsalt"] = "neckbrace"
    return plt


def plot_moment_curves(path, curves, title=None):
    """Save ``{label: MomentCurve}`` as an SVG of moment against angle in degrees."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for label, curve in curves.items():
        ax.plot([math.degrees(t) for t in curve.theta], curve.moment, label=label)
        if curve.transition_angle:
            ax.axvline(math.degrees(curve.transition_angle), color="0.7", lw=0.8, ls="--")
    ax.set_xlabel("bending angle [deg]")
    ax.set_ylabel("base moment [N m]")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
