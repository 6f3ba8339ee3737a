"""Current positivity fails for a superposition of two right-movers.

The faster component overtakes the slower one near the origin and the
on-axis flux through z = 0 turns briefly negative; the flux density is then
not a probability density.
"""

import numpy as np

from toflab.flux import backflow_packet, cpc_check, current_density, plane
from toflab.kijowski import left_weight
from toflab.states import EvolvedState, MagneticGaussian

pk = backflow_packet()
print(f"left-moving weight {left_weight(pk):.1e}")
t = np.arange(0, 20.0001, 0.05)
jz = np.array([current_density(EvolvedState(pk, s), np.zeros(3))[2] for s in t])
print(f"min J_z on axis {jz.min():.3e} at t = {t[jz.argmin()]:.2f}")
res = cpc_check(EvolvedState(pk, 0.0), plane(0.0), t, r_max=0.0, n_r=1, n_phi=1)
print(f"CPC holds: {res.ok} (grid step {res.t_resolution:.3g}, first violation t = {res.first_violation.t:.2f})")

res = cpc_check(EvolvedState(MagneticGaussian(0.0), 0.0), plane(1.0), np.linspace(0, 50, 101))
print(f"magnetic Gaussian through z = 1: CPC holds {res.ok} on {res.n_samples} samples")
