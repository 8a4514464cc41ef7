"""Moment balance about C7 and how much of it a device could carry."""
import math

import numpy as np

from neckbrace import biomech, mechanism as m

statics = biomech.HeadStatics(0.0)
print("head weight", statics.head_weight, "N, COM lever", statics.com_lever, "m, base lever", statics.base_lever, "m")

# Ideal base moment: the device moment that leaves nothing for the neck muscles.
for deg in (0, 10, 20, 30, 40):
    s = statics.at(math.radians(deg))
    ideal = biomech.ideal_base_moment(s)
    res = biomech.solve_statics(s, ideal)
    print(f"{deg:2d} deg: gravity {biomech.gravity_moment(s):6.3f} N m, BM_id {ideal:6.3f} N m, "
          f"muscle moment at BM_id {res.muscle_moment:.1e}")

# Assist fraction of the two pure modes and of the preloaded array
grid = np.radians(np.linspace(0.5, 40, 80))
sweep = biomech.statics_sweep(grid, statics)
for label, gap in (("base", math.inf), ("loaded", 0.0), ("preload -1.7 mm", -1.7e-3)):
    curve = m.moment_curve(m.BarArraySpec(gap=gap), grid)
    prof = biomech.assist_fraction(curve, sweep)
    print(f"{label:>16}: peak assist fraction {prof.peak:.3f} at {math.degrees(prof.peak_theta):.1f} deg")
