"""Bar-array moment curves for a few gap settings.

Run from the repository root: ``python demos/bending_modes.py``.
"""
import math

import numpy as np

from neckbrace import mechanism as m
from neckbrace.plotting import plot_moment_curves

spec = m.BarArraySpec()
print("Base stiffness   E*I_BS =", spec.stiffness(m.StiffnessMode.BASE), "N m^2")
print("Loaded stiffness E*I_LS =", spec.stiffness(m.StiffnessMode.LOADED), "N m^2")

# The elastica integral grows like 2*sqrt(theta) for small angles,
# which gives back the linear beam moment 2*E*I*theta/L.
for deg in (1, 10, 40, 80):
    t = math.radians(deg)
    print(f"Gamma({deg:2d} deg) = {m.gamma(t):.6f}   end shortening = {m.end_shortening(t, spec.free_length) * 1e3:.3f} mm")

# A smaller gap closes earlier, so the stiff branch starts sooner.
grid = np.radians(np.linspace(0, 60, 121))
curves = {}
for gap_mm in (math.inf, 5.0, 1.0, 0.3, 0.0, -1.7):
    curve = m.moment_curve(spec.with_gap(gap_mm * 1e-3), grid)
    label = "base" if math.isinf(gap_mm) else f"gap {gap_mm:g} mm"
    curves[label] = curve
    t_star = curve.transition_angle
    where = "none" if t_star is None else f"{math.degrees(t_star):.2f} deg"
    print(f"{label:>12}: transition {where}, M(30 deg) = {np.interp(math.radians(30), grid, curve.moment):.3f} N m")

print("preload offset at -1.7 mm:", m.preload_offset(spec.with_gap(-1.7e-3)), "N m")
print("wrote", plot_moment_curves("demo_output/bending_modes.svg", curves))
