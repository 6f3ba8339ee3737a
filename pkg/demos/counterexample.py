"""A right-moving Gaussian whose Kijowski density decays too slowly.

F0(phi_t) falls like |t|^(-3/2), so t^2 F0 grows like sqrt|t| and the
time integral converges only slowly: a 10^3 window still misses ~2.4%.
"""

import numpy as np

from toflab.kijowski import axiom_v_counterexample_report, f0_right
from toflab.states import right_moving_gaussian

phi = right_moving_gaussian()
f00 = f0_right(phi)
print(f"F0(phi_0) = {f00:.17g}")

for t in (0.0, 1.0, np.sqrt(3.0), 10.0, 100.0):
    r = f0_right(phi, t=t) / f00
    print(f"t = {t:8.4f}   F0 ratio = {r:.12f}   (1+t^2)^(-3/4) = {(1 + t * t) ** -0.75:.12f}")

rep = axiom_v_counterexample_report()
print(f"growth exponent of t^2 F0: {rep['exponent']:.4f} (sqrt growth is 0.5)")
print(f"int over [-{rep['T']:g}, {rep['T']:g}]: {rep['truncated_integral']:.5f}")
print(f"analytic tail beyond it:  {rep['analytic_tail']:.5f}")
print(f"sum:                      {rep['truncated_integral'] + rep['analytic_tail']:.8f}")
