"""Same physics, three gauges: the standard density moves, the flux does not.

Writes the figure and CSVs to demos/out/fig1, then looks at the eta = 0.5
tail, which decays like 1/tau and so cannot be normalized.
"""

from pathlib import Path

import numpy as np

from toflab import cli, standard

out = Path(__file__).parent / "out" / "fig1"
cli.main(["fig1", "--L", "100", "--eta", "0,0.5,1", "--out", str(out)])
print(f"figure and CSVs in {out}")

rep = standard.normalizability_report(0.5, 1.0)
print(f"eta=0.5, L=1: tail exponent {rep['exponent']:.4f}, c = {rep['c']:.5f}")
print(f"  int_0^1e3 = {rep['integral_T1']:.5f}, int_0^2e3 = {rep['integral_T2']:.5f}")
print(f"  doubling adds {rep['increment']:.5f}; c ln 2 = {rep['c'] * np.log(2):.5f}")
print(f"  reference model sqrt(eta) 0.19 e^(-L^2/2) = {rep['c_predicted']:.5f} (ratio {rep['c_ratio']:.2f})")

# the small-eta limit of tau Pi / sqrt(eta) carries no L dependence
for L in (0.1, 1.0, 2.0):
    print(f"  eta=1e-6, L={L}: tau Pi / sqrt(eta) = {standard.tail_amplitude(1e-6, L):.5f}")
print(f"  limit Gamma(3/4)^2 / (sqrt 2 pi^(3/2)) = {standard.SMALL_ETA_TAIL:.5f}")

rep = standard.normalizability_report(0.0, 1.0)
print(f"eta=0, L=1: tail exponent {rep['exponent']:.3f} -> {rep['verdict']}")
