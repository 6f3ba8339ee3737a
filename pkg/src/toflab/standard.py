"""The "standard" arrival-time density for the magnetic Gaussian, in the
gauge labelled by eta, plus the normalizability and delta-well checks."""

from dataclasses import dataclass, field

import numpy as np

from .curves import DistributionCurve, hybrid_tau_grid
from .exceptions import GridMismatch
from .numerics import QuadratureSpec, halfline_sqrtp_gaussian_integral, integrate_oscillatory, pcfd
from .states import GaugeGeometry, sigma_of_t

METHODS = ("closed", "quad")

# c / sqrt|eta| in the limit eta L^2 -> 0, where Pi_STD ~ c / tau:
# Gamma(3/4)^2 / (sqrt(2) pi^{3/2})
SMALL_ETA_TAIL = 0.19068994087545318
# amplitude of the reference tail model c = sqrt|eta| 0.19 exp(-L^2/2)
TAIL_COEFFICIENT = 0.19


@dataclass
class StdConfig:
    geometry: GaugeGeometry = field(default_factory=GaugeGeometry)
    tau_grid: np.ndarray = None
    method: str = "closed"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.tau_grid is None:
            self.tau_grid = hybrid_tau_grid(10 * max(1.0, self.geometry.L), 400)
        self.tau_grid = np.asarray(self.tau_grid, dtype=float)


def pi_std_magnetic(eta, L, tau, method="closed", allow_negative=False):
    """Pi_STD(tau) = |sigma| / (2 pi^{3/2} sqrt(1+tau^2)) sum_alpha |H_alpha|^2,

    H_alpha = int_0^inf sqrt(p) exp(-sigma p^2/2 + i alpha p L) dp,  1/sigma = 1/(1+i tau) + i eta.
    ``method="closed"`` evaluates H through D_{-3/2}; ``"quad"`` integrates
    along a deformed contour.  Vectorized over tau.
    """
    tau = np.asarray(tau, dtype=float)
    if not allow_negative and np.any(tau < 0):
        raise ValueError("tau must be >= 0 (pass allow_negative=True for diagnostics)")
    sig = sigma_of_t(tau, eta)
    hp = halfline_sqrtp_gaussian_integral(sig, L, +1, method=method)
    hm = halfline_sqrtp_gaussian_integral(sig, L, -1, method=method)
    pref = np.abs(sig) / (2 * np.pi**1.5 * np.sqrt(1 + tau * tau))
    out = pref * (np.abs(hp) ** 2 + np.abs(hm) ** 2)
    return out if out.ndim else float(out)


def pi_std_parabolic(eta, L, tau):
    """Same density written with |D_{-3/2}(i alpha L / sqrt(sigma))|^2 explicitly."""
    tau = np.asarray(tau, dtype=float)
    sig = sigma_of_t(tau, eta)
    root = np.sqrt(sig)
    pref = np.exp(-sig.real * L * L / (2 * np.abs(sig) ** 2)) / (8 * np.sqrt(np.pi * (1 + tau * tau) * np.abs(sig)))
    total = sum(np.abs(pcfd(-1.5, 1j * a * L / root)) ** 2 for a in (+1, -1))
    out = pref * total
    return out if out.ndim else float(out)


def std_curve(config):
    g = config.geometry
    dens = pi_std_magnetic(g.eta, g.L, config.tau_grid, config.method)
    meta = {"eta": g.eta, "L": g.L, "B0": g.B0, "method": config.method, "units": g.units.mode}
    return DistributionCurve(config.tau_grid, dens, f"pi_std eta={g.eta:g}", metadata=meta)


def gauge_dependence_metric(config_a, config_b):
    """sup_tau |Pi_a - Pi_b| for two configurations differing only in eta."""
    if config_a.tau_grid.shape != config_b.tau_grid.shape or np.any(config_a.tau_grid != config_b.tau_grid):
        raise GridMismatch("configs use different tau grids")
    ga, gb = config_a.geometry, config_b.geometry
    if (ga.L, ga.B0, ga.q, ga.units) != (gb.L, gb.B0, gb.q, gb.units):
        raise ValueError("configs differ in more than eta")
    return std_curve(config_a).sup_difference(std_curve(config_b))


def tail_fit(tau, dens):
    """Least squares on log-log: (exponent, c) with Pi ~ c tau^-1 fixed-slope amplitude."""
    slope, _ = np.polyfit(np.log(tau), np.log(dens), 1)
    c = float(np.exp(np.mean(np.log(tau * dens))))
    return float(slope), c


def cumulative_integral(eta, L, T, method="closed", n_per_decade=40):
    """int_0^T Pi_STD dtau by Gauss-Legendre on log-spaced panels."""
    from .numerics import legendre_panels

    edges = np.concatenate([[0.0], np.geomspace(1e-2, T, max(2, int(n_per_decade * np.log10(T / 1e-2))))])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = legendre_panels(a, b, 1, 16)
        total += np.dot(w, pi_std_magnetic(eta, L, x, method))
    return float(total)


def normalizability_report(eta, L, T_fit=(1e3, 1e4), T_double=(1e3, 2e3), method="closed"):
    """Tail exponent, tail coefficient and growth of the cumulative integral."""
    tau = np.geomspace(*T_fit, 41)
    dens = pi_std_magnetic(eta, L, tau, method)
    slope, c = tail_fit(tau, dens)
    I1 = cumulative_integral(eta, L, T_double[0], method)
    I2 = cumulative_integral(eta, L, T_double[1], method)
    predicted = np.sqrt(abs(eta)) * TAIL_COEFFICIENT * np.exp(-L * L / 2)
    divergent = abs(slope + 1) < 0.05
    return {
        "eta": eta,
        "L": L,
        "exponent": slope,
        "c": c,
        "c_predicted": float(predicted),
        "c_ratio": float(c / predicted) if predicted else np.inf,
        "integral_T1": I1,
        "integral_T2": I2,
        "increment": I2 - I1,
        "increment_predicted": c * np.log(T_double[1] / T_double[0]),
        "divergent": bool(divergent),
        "verdict": "divergent (logarithmic)" if divergent else "convergent",
    }


def tail_amplitude(eta, L, tau=None):
    """tau Pi_STD(tau) / sqrt|eta| deep in the tail (tau >> 1/|eta|)."""
    if tau is None:
        tau = 1e6 / abs(eta)
    return float(tau * pi_std_magnetic(eta, L, tau) / np.sqrt(abs(eta)))


# ---------------------------------------------------------------------------
# delta-well bound state


def delta_well_amplitude(p):
    """Fourier transform of exp(-|z|): sqrt(2/pi) / (1 + p^2)."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(2 / np.pi) / (1 + p * p)


def pi_std_delta_well(tau, L=1.0):
    """Pi_STD for the bound state, which evolves as psi_0 exp(i tau/2)."""
    phase = np.exp(0.5j * tau)
    total = 0.0
    for a in (+1, -1):
        spec = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=400,
                              endpoint_singularity="sqrt_origin", oscillation_wavenumber=a * L)
        g = integrate_oscillatory(lambda p: np.sqrt(p) * delta_well_amplitude(a * p) * phase, spec, split=4.0)
        total += abs(g) ** 2
    return total / (2 * np.pi)


def delta_well_constancy(taus=(0.0, 1.0, 5.0, 20.0), L=1.0):
    vals = np.array([pi_std_delta_well(t, L) for t in taus])
    spread = float(np.max(vals) - np.min(vals))
    return {"tau": np.asarray(taus), "values": vals, "spread": spread,
            "constant": bool(spread <= 1e-8 and np.all(vals > 0))}


# ---------------------------------------------------------------------------
# Independent oracle


def pi_std_position_oracle(eta, L, tau, width=10.0):
    """Pi_STD from the position-space z factor, without sigma(tau).

    psi'_z = pi^{-1/4} (1+i tau)^{-1/2} exp(-A z^2), A = 1/(2(1+i tau)) + i eta/2,
    is Fourier transformed by Gauss-Legendre quadrature and the sqrt|p|
    half-line integrals are done on a rule in u = sqrt(p).  Brute force, meant
    for moderate (eta, L, tau).
    """
    from .numerics import legendre_panels

    s = 1 + 1j * tau
    A = 1 / (2 * s) + 0.5j * eta
    zw = width / np.sqrt(2 * A.real)
    z, wz = legendre_panels(-zw, zw, 8 + int(abs(A.imag) * zw * zw / np.pi), 16)
    psi = np.pi**-0.25 / np.sqrt(s) * np.exp(-A * z * z)
    # |psi~|^2 ~ exp(-Re(1/(2A)) p^2)
    pw = width / np.sqrt(2 * (1 / (2 * A)).real)
    n_u = 8 + int((abs((1 / (4 * A)).imag) * pw * pw + L * pw) / np.pi)
    u, wu = legendre_panels(0.0, np.sqrt(pw), n_u, 16)
    p = u * u
    total = 0.0
    for a in (+1, -1):
        ft = (np.exp(-1j * a * np.outer(p, z)) @ (wz * psi)) / np.sqrt(2 * np.pi)
        g = np.dot(wu * 2 * u * u, ft * np.exp(1j * a * p * L))
        total += abs(g) ** 2
    return total / (2 * np.pi)
