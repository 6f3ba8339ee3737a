"""One-dimensional free arrival: momentum and position forms, and <tau>.

Real packets give <tau> = 0 whatever the distance to the detector; a boost
moves the mean to the classical time scale.
"""

import numpy as np

from toflab.abk import Line1DPacket, abk_mean_arrival, classical_tof, pi_ab, pi_ab_leavens
from toflab.states import gaussian_1d, hermite_function_1d

Z = gaussian_1d(0.5, 1.0, -1.0)
pk = Line1DPacket(Z, L=2.0)
for t in (0.5, 1.5, 3.0):
    a = pi_ab(pk, t)
    b = pi_ab_leavens(lambda z: Z.position(z, t), pk.L)
    print(f"tau = {t}: momentum form {a:.12f}, position form {b:.12f}")

for name, Z in (("gaussian", gaussian_1d(0.5)), ("hermite 1", hermite_function_1d(1, 0.8).shifted(0.5))):
    m = abk_mean_arrival(lambda z, Z=Z: Z.position(z), 3.0, (-25, 25))
    print(f"<tau> for real {name}: {m:.2e}")

psi = lambda z: np.pi**-0.25 * np.exp(-z * z / 2 + 3j * z)
print(f"<tau> boosted p=3, L=30: {abk_mean_arrival(psi, 30.0, (-20, 20)):.10f} (classical {classical_tof(0, 3, 30):g})")
