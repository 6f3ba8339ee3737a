"""Wave packets, their evolution, and gauge bookkeeping.

Conventions: hbar = m = 1, psi~(p) = (2 pi)^(-3/2) int d^3x e^(-i p.x) psi(x),
free evolution psi~_t(p) = psi~_0(p) exp(-i t p^2 / 2).

In magnetic units (mass m, length sqrt(hbar/qB0), time m/qB0) the symmetric
gauge is qA = (-y, x, 0) = r phi_hat and the shifted gauge is
qA' = qA - eta z z_hat, reached from qA by lambda = eta z^2 / 2, under which
psi' = psi exp(-i eta z^2 / 2).
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as _herm
from scipy import special
from scipy.interpolate import RegularGridInterpolator

from .exceptions import NodeEncountered, UnsupportedFamily
from .numerics import halfline_gaussian_moment

NODE_THRESHOLD = 1e-300
NORM_TOL = 1e-10


# ---------------------------------------------------------------------------
# Units and gauge


@dataclass(frozen=True)
class UnitSystem:
    """Either hbar = m = sigma = 1 ("free") or magnetic units ("magnetic")."""

    mode: str = "magnetic"
    B0: float = 1.0
    q: float = 1.0
    b0_limit: bool = False

    def __post_init__(self):
        if self.mode not in ("free", "magnetic"):
            raise ValueError(f"unknown unit mode {self.mode!r}")
        if self.B0 < 0:
            raise ValueError("B0 must be >= 0")
        if self.mode == "magnetic" and not self.b0_limit and not self.q * self.B0 > 0:
            raise ValueError("magnetic units need q*B0 > 0 (or the B0 -> 0 limit flag)")

    @property
    def field_factor(self):
        """Coefficient b of qA = b (-y, x, 0) in the chosen units."""
        if self.mode == "free" or self.b0_limit:
            return 0.0
        return 1.0


@dataclass(frozen=True)
class GaugeGeometry:
    """Magnetic field setup, gauge parameter eta and detector plane z = L."""

    eta: float = 0.0
    L: float = 100.0
    B0: float = 1.0
    q: float = 1.0
    units: UnitSystem = field(default_factory=UnitSystem)

    def vector_potential(self, x):
        return vector_potential(x, self.eta, self.units.field_factor)

    def with_eta(self, eta):
        return GaugeGeometry(eta=eta, L=self.L, B0=self.B0, q=self.q, units=self.units)


def vector_potential(x, eta=0.0, b=1.0):
    """qA'(x) = b (-y, x, 0) - eta z z_hat for Cartesian points x[..., 3]."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = -b * x[..., 1]
    out[..., 1] = b * x[..., 0]
    out[..., 2] = -eta * x[..., 2]
    return out


def gauge_phase(z, eta):
    """exp(-i eta z^2 / 2): multiplies psi when going from A to A'."""
    return np.exp(-0.5j * eta * np.asarray(z, dtype=float) ** 2)


def cylindrical_to_cartesian(x_cyl):
    x_cyl = np.asarray(x_cyl, dtype=float)
    r, phi, z = x_cyl[..., 0], x_cyl[..., 1], x_cyl[..., 2]
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


# ---------------------------------------------------------------------------
# Magnetic Gaussian (closed form)


def sigma_of_t(t, eta=0.0):
    """sigma(t) with 1/sigma = 1/(1+it) + i eta (principal branch)."""
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 / (1.0 + 1j * t) + 1j * eta)


def magnetic_psi(x, t, eta=0.0):
    """psi'_t at Cartesian points x[..., 3]."""
    x = np.asarray(x, dtype=float)
    s = 1.0 + 1j * t
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    z = x[..., 2]
    pref = np.exp(-1j * t) / (np.pi**0.75 * np.sqrt(s))
    return pref * np.exp(-r2 / 2 - z * z / (2 * s) - 0.5j * eta * z * z)


def magnetic_grad(x, t, eta=0.0):
    """Cartesian gradient of psi'_t."""
    x = np.asarray(x, dtype=float)
    psi = magnetic_psi(x, t, eta)
    g = np.empty(x.shape, dtype=complex)
    g[..., 0] = -x[..., 0] * psi
    g[..., 1] = -x[..., 1] * psi
    g[..., 2] = (-x[..., 2] / (1.0 + 1j * t) - 1j * eta * x[..., 2]) * psi
    return g


def magnetic_state_position(x_cyl, t, eta=0.0):
    """psi'_t at cylindrical points (r, phi, z)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    return magnetic_psi(cylindrical_to_cartesian(x_cyl), t, eta)


def magnetic_state_momentum(p, t, eta=0.0):
    """psi~'_t(p) = e^{-it} pi^{-3/4} sqrt(sigma/(1+it)) exp(-(px^2+py^2+sigma pz^2)/2)."""
    p = np.asarray(p, dtype=float)
    sig = sigma_of_t(t, eta)
    pref = np.exp(-1j * t) / np.pi**0.75 * np.sqrt(sig) / np.sqrt(1.0 + 1j * t)
    return pref * np.exp(-(p[..., 0] ** 2 + p[..., 1] ** 2 + sig * p[..., 2] ** 2) / 2)


# ---------------------------------------------------------------------------
# One-dimensional Gaussian-polynomial sums


def _gauss_moments(nmax, A, B, support, c0=0.0):
    """[exp(c0) int p^n exp(-A p^2 + B p) dp for n = 0..nmax] over the support.

    support 0: whole line; +1: p > 0; -1: p < 0.  Re(A) > 0.  The log
    prefactor c0 is folded into the exponentials so that large B^2/A
    cannot overflow before it is cancelled.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if support == -1:
        out = _gauss_moments(nmax, A, -B, +1, c0)
        return [(-1) ** n * v for n, v in enumerate(out)]
    root = np.sqrt(A)
    if support == 0:
        first = np.sqrt(np.pi) / root * np.exp(B * B / (4 * A) + c0)
        edge = 0.0
    else:
        x = -B / (2 * root)
        # e^{x^2} erfc(x), evaluated without overflow on either side
        right = x.real >= 0
        ec0 = np.exp(c0)
        with np.errstate(over="ignore", invalid="ignore"):
            w_right = special.wofz(1j * x) * ec0
            w_left = 2 * np.exp(np.where(right, 0, x * x) + c0) - special.wofz(-1j * x) * ec0
        first = 0.5 * np.sqrt(np.pi) / root * np.where(right, w_right, w_left)
        edge = ec0
    out = [first]
    if nmax >= 1:
        out.append((B * first + edge) / (2 * A))
    for n in range(2, nmax + 1):
        out.append(((n - 1) * out[n - 2] + B * out[n - 1]) / (2 * A))
    return out


@dataclass(frozen=True)
class GaussTerm:
    """exp(log_coef) * p^power * exp(-a p^2 + b p), restricted by ``support``."""

    log_coef: complex
    power: int
    a: complex
    b: complex
    support: int = 0

    def __post_init__(self):
        if not complex(self.a).real > 0:
            raise ValueError("Re(a) must be positive")
        if self.support not in (-1, 0, 1):
            raise ValueError("support must be -1, 0 or +1")

    def value(self, p):
        p = np.asarray(p, dtype=float)
        v = np.exp(self.log_coef - self.a * p * p + self.b * p) * p**self.power
        if self.support == 1:
            v = np.where(p > 0, v, 0)
        elif self.support == -1:
            v = np.where(p < 0, v, 0)
        return v


class GaussSum1D:
    """One-dimensional momentum amplitude sum_k term_k(p).

    Everything downstream is closed form: free evolution, position
    representation, overlaps, and the sqrt|p|-weighted half-line integrals.
    """

    def __init__(self, terms):
        self.terms = tuple(terms)

    def __call__(self, p, t=0.0):
        p = np.asarray(p, dtype=float)
        out = sum(term.value(p) for term in self.terms)
        if t:
            out = out * np.exp(-0.5j * t * p * p)
        return out

    def conj_reflect(self):
        """p -> conj(psi~(-p)), i.e. complex conjugation in position space."""
        return GaussSum1D(
            GaussTerm(np.conj(k.log_coef) + (1j * np.pi * k.power if k.power % 2 else 0), k.power,
                      np.conj(k.a), -np.conj(k.b), -k.support)
            for k in self.terms
        )

    def shifted(self, a):
        """Translate in position by a: psi~(p) -> e^{-ipa} psi~(p)."""
        return GaussSum1D(GaussTerm(k.log_coef, k.power, k.a, k.b - 1j * a, k.support) for k in self.terms)

    def evolved(self, t):
        """Freely evolved amplitude, still a GaussSum1D."""
        return GaussSum1D(GaussTerm(k.log_coef, k.power, k.a + 0.5j * t, k.b, k.support) for k in self.terms)

    def times_p(self):
        return GaussSum1D(GaussTerm(k.log_coef, k.power + 1, k.a, k.b, k.support) for k in self.terms)

    def scaled(self, log_factor):
        return GaussSum1D(GaussTerm(k.log_coef + log_factor, k.power, k.a, k.b, k.support) for k in self.terms)

    def position(self, x, t=0.0):
        """psi_t(x) = (2 pi)^(-1/2) int dp psi~_0(p) exp(ipx - itp^2/2)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k in self.terms:
            A = k.a + 0.5j * t
            B = k.b + 1j * x
            out = out + _gauss_moments(k.power, A, B, k.support, k.log_coef)[k.power]
        return out / np.sqrt(2 * np.pi)

    def position_derivative(self, x, t=0.0):
        return 1j * self.times_p().position(x, t)

    def inner(self, other):
        """<self|other> = int conj(self(p)) other(p) dp."""
        total = 0j
        for k in self.terms:
            for m in other.terms:
                sup = _support_overlap(k.support, m.support)
                if sup is None:
                    continue
                n = k.power + m.power
                A = np.conj(k.a) + m.a
                B = np.conj(k.b) + m.b
                total += _gauss_moments(n, A, B, sup, np.conj(k.log_coef) + m.log_coef)[n]
        return complex(total)

    def norm2(self):
        return self.inner(self).real

    def halfline(self, alpha, t=0.0, L=0.0):
        """int theta(alpha p) sqrt|p| psi~_0(p) exp(-itp^2/2 + ipL) dp."""
        t = np.asarray(t, dtype=float)
        total = np.zeros(np.broadcast(t, np.asarray(L)).shape, dtype=complex)
        for k in self.terms:
            if k.support == -alpha:
                continue
            sigma = 2 * k.a + 1j * t
            if alpha > 0:
                b = k.b + 1j * np.asarray(L)
                total = total + halfline_gaussian_moment(k.power, sigma, b, k.log_coef)
            else:
                b = -k.b - 1j * np.asarray(L)
                total = total + (-1) ** k.power * halfline_gaussian_moment(k.power, sigma, b, k.log_coef)
        return total if total.ndim else complex(total)

    def small_p_power(self, alpha):
        """Lowest power of p present on the alpha side at p -> 0 (None if absent)."""
        powers = [k.power for k in self.terms if k.support != -alpha]
        return min(powers) if powers else None


def _support_overlap(s1, s2):
    if s1 == 0:
        return s2
    if s2 == 0 or s2 == s1:
        return s1
    return None


def gaussian_1d(alpha=0.5, beta=0.0, z0=0.0):
    """Normalized psi_0(z) = (2a/pi)^(1/4) exp(-a (z-z0)^2 + i beta (z-z0))."""
    alpha = float(alpha)
    # psi~_0(p) = (2a/pi)^(1/4) (2a)^(-1/2) exp(-(p-beta)^2/(4a) - i p z0)
    log_n = 0.25 * np.log(2 * alpha / np.pi) - 0.5 * np.log(2 * alpha)
    log_c = log_n - beta * beta / (4 * alpha)
    term = GaussTerm(log_c, 0, 1.0 / (4 * alpha), beta / (2 * alpha) - 1j * z0)
    return GaussSum1D([term])


def hermite_function_1d(n, scale=1.0):
    """Normalized Hermite function h_n(p/scale)/sqrt(scale) as a GaussSum1D."""
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    poly = _herm.herm2poly(coeffs)
    norm = 1.0 / np.sqrt(2.0**n * special.factorial(n) * np.sqrt(np.pi) * scale)
    terms = []
    for k, c in enumerate(poly):
        if c == 0:
            continue
        log_c = np.log(abs(c) * norm) - k * np.log(scale) + (1j * np.pi if c < 0 else 0)
        terms.append(GaussTerm(log_c, k, 1.0 / (2 * scale * scale), 0.0))
    return GaussSum1D(terms)


def normalized(packet):
    """Rescale a GaussSum1D to unit norm."""
    return packet.scaled(-0.5 * np.log(packet.norm2()))


# ---------------------------------------------------------------------------
# Three-dimensional packets


class WavePacketSpec:
    """Common interface: ``family``, ``momentum(p, t)``, free evolution."""

    family = "abstract"
    t0 = 0.0
    free = True

    def momentum(self, p, t=0.0):
        raise NotImplementedError

    def transverse_hint(self):
        """(center, scale) suggestions for transverse quadrature grids."""
        return (0.0, 0.0), 1.0

    def pz_extent(self):
        """|pz| beyond which the amplitude is negligible (quadrature cutoff)."""
        return 12.0

    def pz_support(self):
        return 0


class SeparablePacket(WavePacketSpec):
    """sum_k X_k(px) Y_k(py) Z_k(pz) with each factor a GaussSum1D."""

    family = "separable"

    def __init__(self, products, family=None, check_norm=True):
        self.products = tuple(tuple(f) for f in products)
        if family is not None:
            self.family = family
        if check_norm:
            n2 = self.norm2()
            if abs(n2 - 1.0) > NORM_TOL:
                raise ValueError(f"packet not normalized: |psi|^2 = {n2!r}")

    def momentum(self, p, t=0.0):
        p = np.asarray(p, dtype=float)
        out = sum(X(p[..., 0]) * Y(p[..., 1]) * Z(p[..., 2]) for X, Y, Z in self.products)
        if t:
            out = out * np.exp(-0.5j * t * np.sum(p * p, axis=-1))
        return out

    def position(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        return sum(
            X.position(x[..., 0], t) * Y.position(x[..., 1], t) * Z.position(x[..., 2], t)
            for X, Y, Z in self.products
        )

    def gradient(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape, dtype=complex)
        for X, Y, Z in self.products:
            px, py, pz = (F.position(x[..., i], t) for i, F in enumerate((X, Y, Z)))
            dx, dy, dz = (F.position_derivative(x[..., i], t) for i, F in enumerate((X, Y, Z)))
            g[..., 0] += dx * py * pz
            g[..., 1] += px * dy * pz
            g[..., 2] += px * py * dz
        return g

    def transverse_gram(self):
        """M_kl = <X_k Y_k | X_l Y_l> over the transverse plane."""
        n = len(self.products)
        M = np.empty((n, n), dtype=complex)
        for i, (Xi, Yi, _) in enumerate(self.products):
            for j, (Xj, Yj, _) in enumerate(self.products):
                M[i, j] = Xi.inner(Xj) * Yi.inner(Yj)
        return M

    def norm2(self):
        M = self.transverse_gram()
        Z = np.array([[zi.inner(zj) for _, _, zj in self.products] for _, _, zi in self.products])
        return float(np.sum(M * Z).real)

    def transverse_hint(self):
        a = max(abs(np.real(k.a)) for X, Y, _ in self.products for F in (X, Y) for k in F.terms)
        return (0.0, 0.0), 1.0 / np.sqrt(2 * a)

    def pz_extent(self):
        ext = 0.0
        for _, _, Z in self.products:
            for k in Z.terms:
                a = np.real(k.a)
                center = np.real(k.b) / (2 * a)
                ext = max(ext, abs(center) + np.sqrt((40.0 + 2 * k.power) / a))
        return ext

    def pz_support(self):
        sup = {k.support for _, _, Z in self.products for k in Z.terms}
        return sup.pop() if len(sup) == 1 else 0

    def conj_reflect(self):
        return SeparablePacket(
            [(X.conj_reflect(), Y.conj_reflect(), Z.conj_reflect()) for X, Y, Z in self.products],
            family=self.family,
            check_norm=False,
        )

    def translated(self, a=0.0, b=0.0, c=0.0):
        return SeparablePacket(
            [(X.shifted(a), Y.shifted(b), Z.shifted(c)) for X, Y, Z in self.products],
            family=self.family,
            check_norm=False,
        )


def free_gaussian(alpha=0.5, beta=0.0, z0=0.0, alpha_perp=0.5):
    """Gaussian with longitudinal width parameter alpha and boost beta along z."""
    X = gaussian_1d(alpha_perp)
    return SeparablePacket([(X, X, gaussian_1d(alpha, beta, z0))], family="free_gaussian")


def right_moving_gaussian():
    """phi~_0(p) = sqrt(2) pi^(-3/4) theta(pz) exp(-p^2/2)."""
    X = gaussian_1d(0.5)
    # pz factor 2^(1/2) pi^(-1/4) theta(pz) e^{-pz^2/2}
    Z = GaussSum1D([GaussTerm(0.5 * np.log(2) - 0.25 * np.log(np.pi), 0, 0.5, 0.0, support=1)])
    return SeparablePacket([(X, X, Z)], family="right_moving_gaussian")


class MagneticGaussian(WavePacketSpec):
    """psi_0 = pi^(-3/4) exp(-(r^2+z^2)/2) evolving in the field, in gauge eta."""

    family = "magnetic_gaussian"
    free = False

    def __init__(self, eta=0.0):
        self.eta = float(eta)

    def momentum(self, p, t=0.0):
        return magnetic_state_momentum(p, t, self.eta)

    def position(self, x, t=0.0):
        return magnetic_psi(x, t, self.eta)

    def gradient(self, x, t=0.0):
        return magnetic_grad(x, t, self.eta)


class TabulatedPacket(WavePacketSpec):
    """Momentum samples on a rectilinear grid, trilinear interpolation."""

    family = "tabulated"

    def __init__(self, px, py, pz, values, renormalize=False):
        self.axes = tuple(np.asarray(a, dtype=float) for a in (px, py, pz))
        values = np.asarray(values, dtype=complex)
        n2 = self._grid_norm2(values)
        if renormalize:
            values = values / np.sqrt(n2)
        elif abs(n2 - 1.0) > NORM_TOL:
            raise ValueError(f"tabulated packet not normalized: {n2!r}")
        self.values = values
        kw = dict(method="linear", bounds_error=False, fill_value=0.0)
        self._re = RegularGridInterpolator(self.axes, values.real, **kw)
        self._im = RegularGridInterpolator(self.axes, values.imag, **kw)

    def _grid_norm2(self, values):
        dens = np.abs(values) ** 2
        for axis in reversed(range(3)):
            dens = np.trapezoid(dens, self.axes[axis], axis=axis)
        return float(dens)

    @classmethod
    def from_csv(cls, path, renormalize=False):
        """Read rows px,py,pz,re,im (header optional) on a full rectilinear grid."""
        data = np.genfromtxt(path, delimiter=",", comments="#", names=None, skip_header=_header_rows(path))
        px, py, pz = (np.unique(data[:, i]) for i in range(3))
        vals = np.zeros((px.size, py.size, pz.size), dtype=complex)
        ix = np.searchsorted(px, data[:, 0])
        iy = np.searchsorted(py, data[:, 1])
        iz = np.searchsorted(pz, data[:, 2])
        vals[ix, iy, iz] = data[:, 3] + 1j * data[:, 4]
        return cls(px, py, pz, vals, renormalize=renormalize)

    def momentum(self, p, t=0.0):
        p = np.asarray(p, dtype=float)
        out = self._re(p) + 1j * self._im(p)
        if t:
            out = out * np.exp(-0.5j * t * np.sum(p * p, axis=-1))
        return out

    def pz_extent(self):
        return float(np.max(np.abs(self.axes[2])))

    def transverse_hint(self):
        span = max(np.ptp(self.axes[0]), np.ptp(self.axes[1]))
        return (0.0, 0.0), span / 8


def _header_rows(path):
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(v) for v in first.split(",")]
    except ValueError:
        return 1
    return 0


class MomentumPacket(WavePacketSpec):
    """Arbitrary callable amplitude with quadrature hints (generic path)."""

    family = "callable"

    def __init__(self, func, center=(0.0, 0.0), scale=1.0, pz_extent=12.0, pz_support=0):
        self._func = func
        self._center = tuple(center)
        self._scale = float(scale)
        self._pz = float(pz_extent)
        self._support = pz_support

    def momentum(self, p, t=0.0):
        out = self._func(np.asarray(p, dtype=float))
        if t:
            out = out * np.exp(-0.5j * t * np.sum(np.asarray(p) ** 2, axis=-1))
        return out

    def transverse_hint(self):
        return self._center, self._scale

    def pz_extent(self):
        return self._pz

    def pz_support(self):
        return self._support


def rotated(packet, angle):
    """Rotate a packet about the z axis by ``angle``."""
    c, s = np.cos(angle), np.sin(angle)

    def f(p):
        q = np.array(p, dtype=float, copy=True)
        q[..., 0] = c * p[..., 0] + s * p[..., 1]
        q[..., 1] = -s * p[..., 0] + c * p[..., 1]
        return packet.momentum(q)

    center, scale = packet.transverse_hint()
    return MomentumPacket(f, center, scale, packet.pz_extent(), packet.pz_support())


def transversely_translated(packet, a, b):
    """Translate by (a, b) parallel to the detector plane."""

    def f(p):
        return np.exp(-1j * (a * p[..., 0] + b * p[..., 1])) * packet.momentum(p)

    center, scale = packet.transverse_hint()
    return MomentumPacket(f, center, scale, packet.pz_extent(), packet.pz_support())


def conjugated(packet):
    """Position-space conjugate: psi~(p) -> conj(psi~(-p))."""

    def f(p):
        return np.conj(packet.momentum(-np.asarray(p)))

    center, scale = packet.transverse_hint()
    return MomentumPacket(f, (-center[0], -center[1]), scale, packet.pz_extent(), -packet.pz_support())


def evolve_free_momentum(spec, p, t):
    """psi~_t(p) = psi~_0(p) exp(-i t p^2/2)."""
    if not getattr(spec, "free", True):
        raise UnsupportedFamily(f"{spec.family} does not evolve freely")
    return spec.momentum(p, t)


# ---------------------------------------------------------------------------
# Evolved states and polar decomposition


@dataclass(frozen=True)
class EvolvedState:
    """A packet at time t in the gauge labelled by eta.

    For free packets eta applies the same phase exp(-i eta z^2/2) with
    qA' = -eta z z_hat (the field-free limit); magnetic packets carry eta
    themselves.
    """

    spec: WavePacketSpec
    t: float
    gauge_eta: float = 0.0

    @property
    def field_factor(self):
        return 0.0 if getattr(self.spec, "free", True) else 1.0

    def _eta_phase(self):
        # magnetic packets already include their own gauge
        return 0.0 if isinstance(self.spec, MagneticGaussian) else self.gauge_eta

    def psi(self, x):
        if not hasattr(self.spec, "position"):
            raise UnsupportedFamily(f"{self.spec.family} has no position representation")
        x = np.asarray(x, dtype=float)
        return self.spec.position(x, self.t) * gauge_phase(x[..., 2], self._eta_phase())

    def gradient(self, x):
        if not hasattr(self.spec, "gradient"):
            raise UnsupportedFamily(f"{self.spec.family} has no position representation")
        x = np.asarray(x, dtype=float)
        eta = self._eta_phase()
        ph = gauge_phase(x[..., 2], eta)
        g = self.spec.gradient(x, self.t) * ph[..., None]
        if eta:
            g[..., 2] += -1j * eta * x[..., 2] * self.spec.position(x, self.t) * ph
        return g

    def vector_potential(self, x):
        eta = self.spec.eta if isinstance(self.spec, MagneticGaussian) else self.gauge_eta
        return vector_potential(x, eta, self.field_factor)

    def rho(self, x):
        return np.abs(self.psi(x)) ** 2


@dataclass(frozen=True)
class PolarDecomposition:
    rho: np.ndarray
    phase_gradient: np.ndarray


def polar_decompose(state, x, node_threshold=NODE_THRESHOLD):
    """rho = |psi|^2 and grad S = Im(conj(psi) grad psi) / rho."""
    x = np.asarray(x, dtype=float)
    psi = state.psi(x)
    rho = np.abs(psi) ** 2
    bad = rho <= node_threshold
    if np.any(bad):
        where = x[bad][0] if x.ndim > 1 else x
        raise NodeEncountered("density at node threshold", x=where, t=state.t)
    grad = state.gradient(x)
    gs = np.imag(np.conj(psi)[..., None] * grad) / rho[..., None]
    return PolarDecomposition(rho=rho, phase_gradient=gs)
