"""One-dimensional free arrival times: the half-line sqrt|p| form, its
position-space rewrite, the mean arrival time and the classical oracle."""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .curves import DistributionCurve, trapezoid
from .exceptions import InsufficientTailCoverage, NonConvergence, SingularityNotRegularized
from .numerics import legendre_panels
from .states import GaussSum1D

NEVER = np.inf


def classical_tof(z, p, L):
    """(L - z)/p when the particle heads for L, otherwise NEVER (= inf)."""
    z, p = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(p, dtype=float))
    d = L - z
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = d / p
    ok = (d == 0) | ((p != 0) & (np.sign(p) == np.sign(d)))
    out = np.where(ok, np.where(d == 0, 0.0, tau), NEVER)
    return out if out.ndim else float(out)


@dataclass
class Line1DPacket:
    """Momentum amplitude psi~_0(p) on a line and the arrival point L.

    ``amplitude`` is either a :class:`GaussSum1D` (closed-form path) or any
    vectorized callable; ``p_extent`` bounds the support for quadrature.
    """

    amplitude: object
    L: float = 0.0
    p_extent: float = 30.0
    check_norm: bool = True

    def __post_init__(self):
        if self.check_norm:
            n2 = self.norm2()
            if abs(n2 - 1) > 1e-10:
                raise ValueError(f"packet not normalized: {n2!r}")

    @property
    def closed(self):
        return isinstance(self.amplitude, GaussSum1D)

    def norm2(self):
        if self.closed:
            return self.amplitude.norm2()
        f = lambda p: np.abs(self.amplitude(np.atleast_1d(p))[0]) ** 2
        P = self.p_extent
        return integrate.quad(f, -P, P, epsabs=1e-14, epsrel=1e-13, limit=400, points=[0.0])[0]

    def momentum(self, p):
        return self.amplitude(np.asarray(p, dtype=float))


def _halfline_quad(f, alpha, tau, L, p_max, order=16, rel_tol=1e-10):
    """int_0^p_max sqrt(p) f(alpha p) exp(-i tau p^2/2 + i alpha p L) dp, p = u^2."""
    U = np.sqrt(p_max)
    phase = abs(tau) * p_max**2 / 2 + abs(L) * p_max
    n = int(phase / np.pi) + 8
    prev = None
    for _ in range(8):
        u, w = legendre_panels(0.0, U, n, order)
        p = u * u
        vals = 2 * u * u * f(alpha * p) * np.exp(-0.5j * tau * p * p + 1j * alpha * p * L)
        val = np.dot(w, vals)
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300) + 1e-15:
            return val
        prev, n = val, 2 * n
    raise NonConvergence("half-line quadrature did not settle")


def halfline_amplitudes(packet, tau):
    """(G_+, G_-) with G_alpha = int theta(alpha p) sqrt|p| psi~_0 e^{-i tau p^2/2 + i p L} dp."""
    if packet.closed:
        return packet.amplitude.halfline(+1, tau, packet.L), packet.amplitude.halfline(-1, tau, packet.L)
    return tuple(
        _halfline_quad(packet.momentum, a, tau, packet.L, packet.p_extent) for a in (+1, -1)
    )


def pi_ab(packet, tau):
    """(1/2 pi) sum_alpha |G_alpha(tau)|^2 (vectorized over tau on the closed path)."""
    if packet.closed:
        gp, gm = halfline_amplitudes(packet, np.asarray(tau, dtype=float))
        out = (np.abs(gp) ** 2 + np.abs(gm) ** 2) / (2 * np.pi)
    else:
        out = np.array([sum(abs(g) ** 2 for g in halfline_amplitudes(packet, t)) for t in np.atleast_1d(tau)])
        out = out / (2 * np.pi)
        if np.ndim(tau) == 0:
            out = out[0]
    assert np.all(out >= 0)
    return out if np.ndim(out) else float(out)


def ab_curve(packet, tau_grid, label="pi_ab", tail_tol=1e-4):
    """Pi_AB on a grid covering negative and positive tau, with P_AB(inf)."""
    dens = np.asarray(pi_ab(packet, tau_grid), dtype=float)
    curve = DistributionCurve(tau_grid, dens, label, metadata={"L": packet.L})
    if tau_grid[0] < 0:
        curve.p_infinity = min(1.0, max(0.0, nondetection_ab(curve, tail_tol)))
    return curve


def pi_ab_leavens(psi, L, z_max=40.0, tol=1e-9):
    """Pi from the position-space wave function psi (callable, at the time of interest).

    (1/32 pi) sum_alpha |int dz (1 + i alpha sgn(z-L)) |z-L|^{-3/2} (psi(z) - psi(L))|^2.
    With z - L = +-u^2 the subtracted integrand is regular at u = 0; beyond
    |z - L| = z_max the wave function is held at its edge value, which adds
    2 (psi(edge) - psi(L)) / sqrt(z_max) per side.
    """
    psi_L = complex(psi(np.array([L]))[0])
    eps = 1e-7
    jump = abs(complex(psi(np.array([L + eps]))[0]) - complex(psi(np.array([L - eps]))[0]))
    scale = max(abs(psi_L), np.max(np.abs(psi(L + np.linspace(-1, 1, 9)))), 1e-300)
    if jump > 1e-4 * scale:
        raise SingularityNotRegularized("psi is discontinuous at L")
    U = np.sqrt(z_max)
    sides = []
    for s in (+1, -1):
        n, prev = 64, None
        for _ in range(10):
            u, w = legendre_panels(0.0, U, n, 16)
            vals = 2 * (psi(L + s * u * u) - psi_L) / (u * u)
            edge = complex(psi(np.array([L + s * z_max]))[0])
            val = np.dot(w, vals) + 2 * (edge - psi_L) / U
            if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300) + 1e-14:
                break
            prev, n = val, 2 * n
        else:
            raise NonConvergence("Leavens quadrature did not settle")
        sides.append(val)
    i_plus, i_minus = sides
    total = 0.0
    for a in (+1, -1):
        total += abs((1 + 1j * a) * i_plus + (1 - 1j * a) * i_minus) ** 2
    return total / (32 * np.pi)


def _mean_arrival_sum(psi0, L, a, b, n):
    z = np.linspace(a, b, n)
    w = np.full(n, (b - a) / (n - 1))
    w[0] = w[-1] = w[0] / 2
    g = psi0(z)
    wg = w * g
    wzg = wg * z
    # sum over z' < z minus sum over z' > z, excluding z' = z (sgn 0)
    s0 = 2 * np.cumsum(wg) - wg - np.sum(wg)
    s1 = 2 * np.cumsum(wzg) - wzg - np.sum(wzg)
    val = 0.25j * np.sum(w * np.conj(g) * ((2 * L - z) * s0 - s1))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise NonConvergence("mean arrival time came out complex")
    return val.real


def abk_mean_arrival(psi0, L, z_range, n=4001, rel_tol=1e-9):
    """(i/4) int int (2L - z - z') sgn(z - z') conj(psi0(z)) psi0(z') dz dz'.

    The double sum is evaluated exactly in O(n) on a uniform grid over
    ``z_range`` (cumulative sums before/after each node), so that the
    discrete kernel stays antisymmetric and real packets give 0 to rounding.
    The sgn jump makes the error O(h^2); successive halvings are Richardson
    extrapolated until two extrapolants agree.
    """
    a, b = z_range
    prev_raw = _mean_arrival_sum(psi0, L, a, b, n)
    prev = None
    for _ in range(6):
        n = 2 * n - 1
        raw = _mean_arrival_sum(psi0, L, a, b, n)
        ext = (4 * raw - prev_raw) / 3
        if prev is not None and abs(ext - prev) <= rel_tol * max(abs(ext), 1.0):
            return ext
        prev, prev_raw = ext, raw
    raise NonConvergence("mean arrival time did not converge")


def nondetection_ab(curve, tail_tol=1e-4):
    """P_AB(inf) = int_0^inf Pi_AB(-tau) dtau from the negative-tau part of a curve."""
    t = curve.tau_grid
    neg = t <= 0
    if np.count_nonzero(neg) < 3:
        raise InsufficientTailCoverage("curve has no negative-tau samples")
    tn = -t[neg][::-1]
    dn = curve.density[neg][::-1]
    body = trapezoid(dn, tn)
    T, end = tn[-1], dn[-1]
    # power-law extrapolation of the remaining tail from the last two samples
    if end <= 0:
        tail = 0.0
    else:
        prev_t, prev_d = tn[-2], dn[-2]
        q = -np.log(end / prev_d) / np.log(T / prev_t) if prev_d > 0 else np.inf
        tail = end * T / (q - 1) if q > 1 else np.inf
    if tail > tail_tol:
        raise InsufficientTailCoverage(f"negative-tau tail beyond {T:g} estimated at {tail:.2g}")
    return float(min(1.0, max(0.0, body + tail)))


def moment_condition_check(packet, ks=range(2, 9)):
    """True iff |psi~_0(p)| / |p|^(3/2) visibly goes to 0 as p -> 0 on both sides.

    The ratio over p = 10^-k must be non-increasing and drop by more than a
    factor 10 overall (identically zero counts as satisfied).
    """
    for s in (+1, -1):
        p = s * 10.0 ** -np.asarray(list(ks), dtype=float)
        r = np.abs(packet.momentum(p)) / np.abs(p) ** 1.5
        if np.all(r == 0):
            continue
        if np.any(np.diff(r) > 1e-12 * r[:-1]):
            return False
        if not r[-1] * 10 < r[0]:
            return False
    return True


def time_reversed(packet):
    """Packet with psi~_0(p) -> conj(psi~_0(-p)) (real psi_0 maps to itself)."""
    if packet.closed:
        return Line1DPacket(packet.amplitude.conj_reflect(), packet.L, packet.p_extent, check_norm=False)
    return Line1DPacket(lambda p: np.conj(packet.amplitude(-np.asarray(p))), packet.L, packet.p_extent, check_norm=False)
