"""Wilcoxon comparison of Base and Loaded on a synthetic eight-participant study."""
import numpy as np

from neckbrace import protocol, stats

# All eight participants lower their activity: the smallest exact p for n = 8.
res = stats.wilcoxon_signed_rank(stats.PairedSample(np.ones(8), np.linspace(0.2, 0.9, 8)))
print("all-negative n=8:", res)

table = protocol.synth_activity_table(n_participants=8, seed=1)
cmp = stats.compare_conditions(table)
print(cmp[["muscle", "posture_plane", "posture_deg", "mean_base", "mean_loaded", "p_value", "significant_05"]]
      .to_string(index=False, float_format=lambda v: f"{v:.4f}"))

# Under no effect a cell is still "significant" in 10/256 of exact n = 8 tests.
runs = [stats.compare_conditions(protocol.synth_activity_table(seed=s)) for s in range(20)]
null = [int(((r.posture_plane == "transverse") & (r.p_value < 0.05)).sum()) for r in runs]
print("false positives among 16 rotation cells over 20 studies:", null)
