"""Recover stiffness, transition angle and friction from a bending test."""
import math

import numpy as np

from neckbrace import fitlab, mechanism as m

spec = m.BarArraySpec(gap=m.end_shortening(math.radians(20), 0.08))
grid = np.radians(np.linspace(2, 40, 77))

# Synthetic cycle with friction and 2 % force noise
trace = fitlab.synthesize_bend_test(spec, grid, load_height=0.12, friction=0.05, noise=0.02, seed=0)
loading, unloading = fitlab.branches(trace, load_height=0.12)
res = fitlab.fit_parameters(loading, unloading)

print("true  EI_pre %.4f  EI_post %.4f  theta* 20.00 deg  friction 0.0500" % (
    spec.stiffness(m.StiffnessMode.BASE), spec.stiffness(m.StiffnessMode.LOADED)))
print("fit   EI_pre %.4f  EI_post %.4f  theta* %.2f deg  friction %.4f" % (
    res.stiffness_pre, res.stiffness_post, math.degrees(res.transition_angle_est), res.friction_moment))
print("residual rms %.4f N m" % res.residual_rms)

# Without a transition the two-regime model is not used
plain = fitlab.fit_parameters(*fitlab.branches(fitlab.synthesize_bend_test(m.BarArraySpec(), grid), 0.12))
print("base-only trace: transition", plain.transition_angle_est, "EI", round(plain.stiffness_pre, 4))
