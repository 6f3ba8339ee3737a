"""Special functions and quadrature kernels.

The workhorse is :func:`halfline_gaussian_moment`, the integral

    int_0^inf p^(m+1/2) exp(c0 - sigma p^2/2 + b p) dp,

which every Gaussian arrival-time density in the package reduces to.  It has
a closed form in terms of the parabolic cylinder function D_{-m-3/2} and a
direct-quadrature form along a deformed contour; both are exposed so that one
can be checked against the other.

Complex numbers are plain Python/numpy ``complex``; no wrapper type is used.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .exceptions import DivergentIntegral, NonConvergence

__all__ = [
    "QuadratureSpec",
    "erf",
    "pcfd",
    "pcfd_scaled",
    "halfline_gaussian_moment",
    "halfline_sqrtp_gaussian_integral",
    "integrate_interval",
    "integrate_oscillatory",
    "gauss_legendre",
    "legendre_panels",
    "hermite_grid",
    "SERIES_RADIUS",
    "ASYMPTOTIC_RADIUS",
]

# Branch boundaries for D_nu; picked by comparing against high-precision
# reference values (see tests/test_numerics.py).
SERIES_RADIUS = 3.5
ASYMPTOTIC_RADIUS = 10.0

_SINGULARITIES = ("none", "sqrt_origin")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and endpoint policy for the adaptive integrators."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    endpoint_singularity: str = "none"
    oscillation_wavenumber: float = 0.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.endpoint_singularity not in _SINGULARITIES:
            raise ValueError(
                f"endpoint_singularity must be one of {_SINGULARITIES}, "
                f"got {self.endpoint_singularity!r}"
            )


DEFAULT_SPEC = QuadratureSpec()


def erf(x):
    """Error function (vectorized)."""
    return special.erf(x)


# ---------------------------------------------------------------------------
# Gauss rules


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def legendre_panels(a, b, n_panels, order=16):
    """Composite Gauss-Legendre rule with ``n_panels`` equal panels on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, int(n_panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=None)
def _hermgauss(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    # Weights for integrating f itself rather than f * exp(-x^2).
    w = w * np.exp(x**2)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def hermite_grid(center, scale, n):
    """Tensor Gauss-Hermite grid in the plane.

    Returns ``(nodes, weights)`` with ``nodes`` of shape (n*n, 2), suited to
    integrands that decay like a Gaussian of width ~``scale`` around
    ``center``.
    """
    x, w = _hermgauss(int(n))
    cx, cy = center
    sx, sy = np.broadcast_to(scale, (2,))
    gx, gy = np.meshgrid(cx + sx * x, cy + sy * x, indexing="ij")
    wx, wy = np.meshgrid(sx * w, sy * w, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=-1), (wx * wy).ravel()


# ---------------------------------------------------------------------------
# Parabolic cylinder function D_nu
#
# Internally everything is expressed through the scaled function
#     E_nu(z) = exp(z^2/4) D_nu(z),
# split into at most two pieces  E = m1*exp(l1) + m2*exp(l2)  so that callers
# can fold in large exponential prefactors without overflow.


def _kummer_m(a, b, x, tol=1e-17, max_terms=400):
    x = np.asarray(x, dtype=complex)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(max_terms):
        term = term * ((a + k) / (b + k)) * x / (k + 1)
        total = total + term
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)):
            return total
    raise NonConvergence(f"Kummer series M({a}, {b}, x) did not converge")


def _scaled_series(nu, z):
    x = z * z / 2
    first = np.sqrt(np.pi) * special.rgamma((1 - nu) / 2) * _kummer_m(-nu / 2, 0.5, x)
    second = np.sqrt(2 * np.pi) * special.rgamma(-nu / 2) * z * _kummer_m((1 - nu) / 2, 1.5, x)
    return 2.0 ** (nu / 2) * (first - second)


def _asymptotic_sum(z2, factor, tol):
    """Optimally truncated sum of t_k, t_k = t_{k-1} * factor(k) / z^2.

    Returns the partial sum and the magnitude of the first omitted term.
    """
    term = np.ones_like(z2)
    total = np.ones_like(z2)
    active = np.ones(z2.shape, dtype=bool)
    err = np.zeros(z2.shape)
    for k in range(1, 400):
        nxt = term * factor(k) / z2
        mag = np.abs(nxt)
        stop = active & ((mag >= np.abs(term)) | (mag <= tol * np.abs(total)))
        err = np.where(stop, mag, err)
        active &= ~stop
        if not np.any(active):
            break
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
    return total, err


def _scaled_asymptotic(nu, z, tol=1e-16):
    z = np.asarray(z, dtype=complex)
    z2 = z * z
    logz = np.log(z)
    s1, err1 = _asymptotic_sum(z2, lambda k: -(nu - 2 * k + 2) * (nu - 2 * k + 1) / (2 * k), tol)
    s2, err2 = _asymptotic_sum(z2, lambda k: (nu + 2 * k - 1) * (nu + 2 * k) / (2 * k), tol)
    if np.any(err1 > 1e-10 * np.abs(s1)):
        raise NonConvergence("asymptotic expansion of D_nu too inaccurate at this |z|")
    arg = np.angle(z)
    rg = special.rgamma(-nu)
    conn = np.zeros(z.shape, dtype=complex)
    # the recessive exponential switches on across the Stokes lines
    # arg z = +-pi/2, where it is smaller than exp(-|z|^2/2) relative
    upper = arg > np.pi / 2
    lower = arg < -np.pi / 2
    conn[upper] = -np.sqrt(2 * np.pi) * rg * np.exp(1j * np.pi * nu)
    conn[lower] = -np.sqrt(2 * np.pi) * rg * np.exp(-1j * np.pi * nu)
    l1 = nu * logz
    l2 = (-nu - 1) * logz + z2 / 2
    m2 = conn * s2
    l2 = np.where(m2 == 0, -np.inf, l2)
    return l1, s1, l2, m2


def _ray_path(z):
    phi = float(np.clip(-np.angle(z), -np.pi / 8, np.pi / 8)) if z != 0 else 0.0
    rot = np.exp(1j * phi)
    a = np.cos(2 * phi) / 2
    bb = (z * rot).real
    rmax = (-bb + np.sqrt(bb * bb + 4 * a * 45.0)) / (2 * a)
    rmax = max(rmax, 1e-12)
    phase = abs(np.sin(2 * phi)) * rmax**2 / 2 + abs((z * rot).imag) * rmax
    n_panels = int(np.ceil(phase / 1.5 + 15)) + 2
    return rot, rmax, n_panels


@lru_cache(maxsize=64)
def _gauss_jacobi(order, k):
    return special.roots_jacobi(order, 0.0, k)


def _weighted_panels(b, n_panels, k, order=16):
    """Nodes/weights on [0, b] for int_0^b r^k f(r) dr, f smooth.

    Gauss-Jacobi absorbs r^k on the first panel; Gauss-Legendre elsewhere.
    """
    h = b / n_panels
    xj, wj = _gauss_jacobi(order, float(k))
    r0 = h * (xj + 1) / 2
    w0 = wj * (h / 2) ** (k + 1)
    if n_panels == 1:
        return r0, w0
    r1, w1 = legendre_panels(h, b, n_panels - 1, order)
    return np.concatenate([r0, r1]), np.concatenate([w0, w1 * r1**k])


def _laplace_integral(k, z, c0=0.0, order=16):
    """int_0^inf t^k exp(c0 - t^2/2 - z t) dt for a single complex z, k > -1.

    The contour is deformed so that the integrand never oscillates fast
    relative to its own magnitude: for Re z >= 0 (or small |z|) a ray out of the origin
    (endpoint-dominated), otherwise a straight segment to the saddle t = -z
    followed by the horizontal steepest-descent line.
    """
    z = complex(z)
    c0 = complex(c0)
    # near the origin the saddle would sit on the t^k branch point; the ray
    # is well conditioned there anyway
    if z.real >= 0 or abs(z) < 2.0:
        rot, rmax, n_panels = _ray_path(z)
        r, w = _weighted_panels(rmax, n_panels, k, order)
        t = r * rot
        return rot ** (k + 1) * np.dot(w, np.exp(c0 - t * t / 2 - z * t))

    ts = -z
    # segment 0 -> ts, parametrized t = s*ts
    span = abs(ts)
    phase_a = abs((ts * ts).imag) / 2 + 1.0
    mag_a = abs((ts * ts).real) / 2
    n_a = int(np.ceil(phase_a / 1.5 + mag_a / 3)) + 4
    sn, w = _weighted_panels(1.0, n_a, k, order)
    g = c0 + ts * ts * (sn - sn * sn / 2)
    seg_a = ts ** (k + 1) * np.dot(w, np.exp(g))
    # steepest descent: t = ts + r, exponent drops by r^2/2
    r, wr = legendre_panels(0.0, 9.5 + 1e-3 * span, 12, order)
    g_s = c0 + ts * ts / 2
    seg_b = np.dot(wr, (ts + r) ** k * np.exp(g_s - r * r / 2))
    return seg_a + seg_b


def _upward_scaled(nu, z):
    """E_nu for nu >= 0 and Re z >= 0 by upward recurrence from negative orders.

    E_{v+1} = z E_v - v E_{v-1}; stable here because E is algebraic in z.
    """
    n_up = int(np.floor(nu)) + 1
    base = nu - n_up
    lo = np.array([special.rgamma(1 - base) * _laplace_integral(-base, zz) for zz in z])
    hi = np.array([special.rgamma(-base) * _laplace_integral(-base - 1, zz) for zz in z])
    v = base
    for _ in range(n_up):
        lo, hi = hi, z * hi - v * lo
        v += 1
    return hi


def _scaled_terms(nu, z):
    """E_nu(z) = m1*exp(l1) + m2*exp(l2), elementwise."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    l1 = np.zeros(zf.shape, dtype=complex)
    m1 = np.zeros(zf.shape, dtype=complex)
    l2 = np.full(zf.shape, -np.inf, dtype=complex)
    m2 = np.zeros(zf.shape, dtype=complex)
    az = np.abs(zf)

    small = az <= SERIES_RADIUS
    large = az >= ASYMPTOTIC_RADIUS
    mid = ~small & ~large

    if np.any(small):
        m1[small] = _scaled_series(nu, zf[small])
    if np.any(large):
        a1, b1, a2, b2 = _scaled_asymptotic(nu, zf[large])
        l1[large], m1[large], l2[large], m2[large] = a1, b1, a2, b2
    if np.any(mid):
        if nu < 0:
            rg = special.rgamma(-nu)
            m1[mid] = [rg * _laplace_integral(-nu - 1, zz) for zz in zf[mid]]
        else:
            zm = zf[mid]
            right = zm.real >= 0
            vals = np.empty(zm.shape, dtype=complex)
            if np.any(right):
                vals[right] = _upward_scaled(nu, zm[right])
            left = ~right
            if np.any(left):
                # reflect into Re z > 0, where the recurrence is stable:
                # D_v(z) = e^{-s i pi v} D_v(-z)
                #          + sqrt(2 pi)/Gamma(-v) e^{-s i pi (v+1)/2} D_{-v-1}(s i z)
                zl = zm[left]
                sgn = np.where(zl.imag <= 0, 1.0, -1.0)
                vals[left] = np.exp(-1j * np.pi * nu * sgn) * _upward_scaled(nu, -zl)
                rg = special.rgamma(-nu)
                if rg != 0:
                    inner = np.array(
                        [special.rgamma(nu + 1) * _laplace_integral(nu, 1j * sg * zz) for zz, sg in zip(zl, sgn)]
                    )
                    idx = np.flatnonzero(mid)[left]
                    l2[idx] = zl * zl / 2
                    m2[idx] = np.sqrt(2 * np.pi) * rg * np.exp(-0.5j * np.pi * (nu + 1) * sgn) * inner
            m1[mid] = vals
    return (l1.reshape(shape), m1.reshape(shape), l2.reshape(shape), m2.reshape(shape))


def _combine(l1, m1, l2, m2, shift):
    out = m1 * np.exp(l1 + shift)
    mask = m2 != 0
    if np.any(mask):
        out = out + np.where(mask, m2 * np.exp(np.where(mask, l2 + shift, 0)), 0)
    return out


def pcfd_scaled(order, z):
    """exp(z**2/4) * D_order(z) for complex ``z``."""
    terms = _scaled_terms(float(order), z)
    out = _combine(*terms, 0.0)
    return out if np.ndim(out) else complex(out)


def pcfd(order, z):
    """Parabolic cylinder function D_order(z) for complex ``z``.

    Three branches: Kummer power series for |z| <= SERIES_RADIUS, the
    integral representation (negative orders; recurrence otherwise) in the
    middle, and the sector-aware asymptotic expansion for
    |z| >= ASYMPTOTIC_RADIUS, whose truncation error is below ~exp(-|z|^2/2)
    relative.  Very large |z| may over/underflow in double precision; use
    :func:`halfline_gaussian_moment` for combined quantities.
    """
    z = np.asarray(z, dtype=complex)
    terms = _scaled_terms(float(order), z)
    out = _combine(*terms, -z * z / 4)
    return out if np.ndim(out) else complex(out)


# ---------------------------------------------------------------------------
# Half-line Gaussian moments


def _check_sigma(sigma):
    sigma = np.asarray(sigma, dtype=complex)
    if np.any(sigma.real < 0):
        raise DivergentIntegral("Re(sigma) < 0: Gaussian factor grows")
    if np.any(sigma == 0):
        raise DivergentIntegral("sigma == 0: no Gaussian damping")
    return sigma


def halfline_gaussian_moment(m, sigma, b, c0=0.0, method="closed"):
    """int_0^inf p^(m+1/2) exp(c0 - sigma p^2/2 + b p) dp.

    ``sigma``, ``b`` and ``c0`` are complex and broadcast together; Re(sigma)
    must be >= 0.  ``c0`` is a log-prefactor folded into the exponent, which
    keeps results finite when exp(c0) and the bare integral would
    individually under/overflow.

    method="closed" uses D_{-m-3/2}; method="quad" integrates along a deformed
    contour in the scaled variable t = sqrt(sigma) p.  Principal branches
    throughout (Re sqrt(sigma) > 0).
    """
    sigma = _check_sigma(sigma)
    b = np.asarray(b, dtype=complex)
    c0 = np.asarray(c0, dtype=complex)
    sigma, b, c0 = np.broadcast_arrays(sigma, b, c0)
    k = m + 0.5
    root = np.sqrt(sigma)
    z = -b / root
    prefactor_log = -(k + 1) / 2 * np.log(sigma)
    if method == "closed":
        l1, m1, l2, m2 = _scaled_terms(-(k + 1), z)
        out = special.gamma(k + 1) * _combine(l1, m1, l2, m2, c0 + prefactor_log)
    elif method == "quad":
        flat = [
            _laplace_integral(k, zz, cc + pl)
            for zz, cc, pl in zip(z.ravel(), c0.ravel(), prefactor_log.ravel())
        ]
        out = np.array(flat, dtype=complex).reshape(z.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if np.ndim(out) else complex(out)


def halfline_sqrtp_gaussian_integral(sigma, L, sign=+1, method="closed"):
    """int_0^inf sqrt(p) exp(-sigma p^2/2 + i*sign*p*L) dp."""
    if sign in ("+", "-"):
        sign = 1 if sign == "+" else -1
    b = 1j * sign * np.asarray(L, dtype=complex)
    return halfline_gaussian_moment(0, sigma, b, method=method)


# ---------------------------------------------------------------------------
# Generic adaptive quadrature (QUADPACK via scipy)


def integrate_interval(f, a, b, spec=DEFAULT_SPEC):
    """Adaptive integral of a scalar (possibly complex) function over [a, b].

    With ``endpoint_singularity="sqrt_origin"`` the substitution p = a + u^2
    removes a sqrt-type kink or singularity at the lower limit.
    """
    kw = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions, complex_func=True)
    if spec.endpoint_singularity == "sqrt_origin":
        upper = np.inf if np.isinf(b) else np.sqrt(b - a)

        def g(u):
            return 2 * u * f(a + u * u)

        val, err = integrate.quad(g, 0.0, upper, full_output=False, **kw)
    else:
        val, err = integrate.quad(f, a, b, **kw)
    val = complex(val)
    if abs(err) > max(spec.abs_tol, spec.rel_tol * abs(val)) * 10:
        raise NonConvergence(f"quadrature error estimate {abs(err):.3g} exceeds tolerance")
    return val if val.imag != 0 else val.real


def integrate_oscillatory(f, spec=DEFAULT_SPEC, a=0.0, split=None):
    """int_a^inf f(p) exp(i k p) dp with k = spec.oscillation_wavenumber.

    The head [a, a+split] goes through :func:`integrate_interval` (honouring
    the endpoint policy); the tail uses QUADPACK's Fourier-weighted rule on
    the real and imaginary parts of f separately.
    """
    k = spec.oscillation_wavenumber
    if split is None:
        split = 1.0 if k == 0 else min(1.0, np.pi / abs(k))
    head = integrate_interval(lambda p: f(p) * np.exp(1j * k * p), a, a + split, spec)
    if k == 0:
        tail = integrate_interval(f, a + split, np.inf, QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions))
        return complex(head) + complex(tail)
    lo = a + split
    kw = dict(epsabs=spec.abs_tol, limlst=100, limit=spec.max_subdivisions)
    parts = []
    for part in (lambda p: complex(f(p)).real, lambda p: complex(f(p)).imag):
        c, _ = integrate.quad(part, lo, np.inf, weight="cos", wvar=abs(k), **kw)
        s, _ = integrate.quad(part, lo, np.inf, weight="sin", wvar=abs(k), **kw)
        parts.append(c + 1j * np.sign(k) * s)
    tail = parts[0] + 1j * parts[1]
    return complex(head) + tail
