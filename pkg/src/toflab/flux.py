"""Probability current, the flux arrival-time density, current positivity
and the far-field current."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .exceptions import NonConvergence, RegimeViolation
from .numerics import erf
from .states import (
    EvolvedState,
    GaussSum1D,
    MagneticGaussian,
    SeparablePacket,
    gaussian_1d,
    polar_decompose,
)

# ---------------------------------------------------------------------------
# Surfaces


@dataclass(frozen=True)
class SurfacePatch:
    """Detection surface: the plane z = L (normal +z) or a tabulated mesh.

    A mesh is given by ``points`` (N, 3), unit ``normals`` (N, 3) and
    ``areas`` (N,), so that int J.dS = sum_k areas_k J(points_k).normals_k.
    """

    kind: str = "plane_z"
    L: float = 0.0
    points: np.ndarray = None
    normals: np.ndarray = None
    areas: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("plane_z", "mesh"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.kind == "mesh":
            n = np.asarray(self.normals, dtype=float)
            if n.shape != np.shape(self.points) or np.any(np.abs(np.linalg.norm(n, axis=-1) - 1) > 1e-12):
                raise ValueError("mesh normals must be unit vectors, one per point")

    @property
    def normal(self):
        return np.array([0.0, 0.0, 1.0])


def plane(L):
    return SurfacePatch("plane_z", float(L))


@dataclass(frozen=True)
class CurrentSample:
    x: np.ndarray
    t: float
    J: np.ndarray


# ---------------------------------------------------------------------------
# Current density


def current_density(state, x, A=None, path="direct"):
    """J = Im(conj(psi) grad psi) - qA |psi|^2 at points x[..., 3].

    ``A`` evaluates qA(x); it defaults to the state's own gauge.  With
    ``path="velocity"`` J is assembled as rho (grad S - qA) through the
    polar decomposition, which refuses nodes.
    """
    x = np.asarray(x, dtype=float)
    A = state.vector_potential if A is None else A
    if path == "velocity":
        pd = polar_decompose(state, x)
        return pd.rho[..., None] * (pd.phase_gradient - A(x))
    psi = state.psi(x)
    grad = state.gradient(x)
    rho = np.abs(psi) ** 2
    return np.imag(np.conj(psi)[..., None] * grad) - A(x) * rho[..., None]


def magnetic_rho(x, t):
    x = np.asarray(x, dtype=float)
    s = 1.0 + t * t
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    return np.exp(-r2 - x[..., 2] ** 2 / s) / (np.pi**1.5 * np.sqrt(s))


def magnetic_current(x, t):
    """Closed-form current of the magnetic Gaussian: rho (y, -x, t z/(1+t^2))."""
    x = np.asarray(x, dtype=float)
    rho = magnetic_rho(x, t)
    J = np.empty(x.shape)
    J[..., 0] = x[..., 1] * rho
    J[..., 1] = -x[..., 0] * rho
    J[..., 2] = t * x[..., 2] / (1 + t * t) * rho
    return J


# ---------------------------------------------------------------------------
# Flux arrival-time density


def pi_qf_magnetic(L, tau):
    """tau L exp(-L^2/(1+tau^2)) / (sqrt(pi) (1+tau^2)^{3/2})."""
    tau = np.asarray(tau, dtype=float)
    s = 1 + tau * tau
    out = tau * L * np.exp(-L * L / s) / (np.sqrt(np.pi) * s**1.5)
    return out if out.ndim else float(out)


def qf_cdf(L, tau):
    """int_0^tau Pi_QF = (erf(L) - erf(L / sqrt(1+tau^2))) / 2."""
    tau = np.asarray(tau, dtype=float)
    out = 0.5 * (special.erf(L) - special.erf(L / np.hypot(1.0, tau)))
    return out if out.ndim else float(out)


def _radial_scale(state, tau):
    if isinstance(state.spec, MagneticGaussian):
        return 1.0
    _, s = state.spec.transverse_hint() if hasattr(state.spec, "transverse_hint") else (None, 1.0)
    # free transverse spreading of a packet of momentum width 1/(2 s^2)
    return s * s + tau * tau / (4 * s * s) if s else 1.0 + tau * tau


def _plane_flux(state, L, n_r, n_phi, scale):
    # int r dr dphi J_z = (scale/2) int dv e^{-v} [e^{v} J_z(sqrt(scale v), phi)]
    v, w = special.roots_laguerre(n_r)
    r = np.sqrt(scale * v)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    R, P = np.meshgrid(r, phi, indexing="ij")
    x = np.stack([R * np.cos(P), R * np.sin(P), np.full_like(R, L)], axis=-1)
    jz = current_density(state, x)[..., 2]
    ang = jz.mean(axis=1) * 2 * np.pi
    return 0.5 * scale * np.dot(w * np.exp(v), ang)


def pi_qf(state, surface, tau, n_r=24, n_phi=16, rel_tol=1e-10, radial_scale=None):
    """int_Q J.dS at time tau for the state's packet and gauge (may be negative).

    The plane is integrated in polar coordinates with a Gauss-Laguerre rule in
    r^2; the order is doubled until two successive values agree.
    """
    st = EvolvedState(state.spec, float(tau), state.gauge_eta)
    if surface.kind == "mesh":
        J = current_density(st, surface.points)
        return float(np.sum(surface.areas * np.sum(J * surface.normals, axis=-1)))
    scale = _radial_scale(st, tau) if radial_scale is None else radial_scale
    prev = _plane_flux(st, surface.L, n_r, n_phi, scale)
    for _ in range(4):
        n_r, n_phi = 2 * n_r, 2 * n_phi
        val = _plane_flux(st, surface.L, n_r, n_phi, scale)
        if abs(val - prev) <= rel_tol * abs(val) + 1e-300:
            return float(val)
        prev = val
    raise NonConvergence(f"flux integral at tau={tau} did not settle")


def qf_curve(state, surface, tau_grid, **kw):
    from .curves import DistributionCurve

    dens = np.array([pi_qf(state, surface, t, **kw) for t in tau_grid])
    return DistributionCurve(tau_grid, dens, "pi_qf", metadata={"L": surface.L})


# ---------------------------------------------------------------------------
# Current positivity


@dataclass
class CPCResult:
    ok: bool
    n_samples: int
    t_resolution: float
    worst: CurrentSample = None
    first_violation: CurrentSample = None
    tol: float = 0.0
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def cpc_check(state, surface, t_grid, tol=1e-14, r_max=4.0, n_r=12, n_phi=8):
    """J.dS >= -tol at every sampled surface point and time.

    Only a finite grid can be certified; the largest time step is reported
    with the verdict.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        return CPCResult(True, 0, 0.0, tol=tol)
    if surface.kind == "plane_z":
        r = np.linspace(0.0, r_max, n_r)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        R, P = np.meshgrid(r, phi, indexing="ij")
        pts = np.stack([R * np.cos(P), R * np.sin(P), np.full_like(R, surface.L)], axis=-1).reshape(-1, 3)
        normals = np.broadcast_to(surface.normal, pts.shape)
    else:
        pts, normals = np.asarray(surface.points), np.asarray(surface.normals)
    worst = first = None
    worst_flux = np.inf
    for t in t_grid:
        st = EvolvedState(state.spec, float(t), state.gauge_eta)
        J = current_density(st, pts)
        flux = np.sum(J * normals, axis=-1)
        k = int(np.argmin(flux))
        sample = CurrentSample(pts[k].copy(), float(t), J[k].copy())
        if flux[k] < worst_flux:
            worst, worst_flux = sample, float(flux[k])
        if first is None and flux[k] < -tol:
            first = sample
    dt = float(np.max(np.diff(t_grid))) if t_grid.size > 1 else 0.0
    return CPCResult(first is None, pts.shape[0] * t_grid.size, dt, worst, first, tol, {"worst_flux": worst_flux})


def backflow_packet(p1=1.0, p2=4.0, a=2.0, b=1.0, alpha=0.02, z0=-10.0):
    """Transverse Gaussian times a superposition of two right-moving 1-D
    Gaussians with momenta p1 and p2 and a relative sign (a g1 - b g2); its
    current through z = 0 turns negative while the faster component overtakes."""
    g1 = gaussian_1d(alpha, p1, z0)
    g2 = gaussian_1d(alpha, p2, z0)
    Z = GaussSum1D(list(g1.scaled(np.log(a)).terms) + list(g2.scaled(np.log(b) + 1j * np.pi).terms))
    X = gaussian_1d(0.5)
    raw = SeparablePacket([(X, X, Z)], check_norm=False)
    Z = Z.scaled(-0.5 * np.log(raw.norm2()))
    return SeparablePacket([(X, X, Z)], family="backflow_superposition")


# ---------------------------------------------------------------------------
# Far field


def far_field_flux(spec, x, t, crossing_time=1.0, max_speed=None):
    """J(x, t) ~ (x / t^4) |psi~_0(x/t)|^2 for freely evolving packets.

    Warns (and still computes) when t < 100 crossing times or when x/t lies
    outside the packet's momentum range.
    """
    x = np.asarray(x, dtype=float)
    p = x / t
    if not getattr(spec, "free", True):
        warnings.warn("far-field current assumes free evolution", RegimeViolation, stacklevel=2)
    if t < 100 * crossing_time:
        warnings.warn(f"t={t:g} is below 100 crossing times", RegimeViolation, stacklevel=2)
    if max_speed is not None and np.any(np.linalg.norm(p, axis=-1) > max_speed):
        warnings.warn("x/t outside the packet's momentum range", RegimeViolation, stacklevel=2)
    dens = np.abs(spec.momentum(p)) ** 2
    return x / t**4 * dens[..., None]


# ---------------------------------------------------------------------------
# Continuity


def continuity_residual(state_at, x, t, h=1e-4):
    """d rho/dt + div J by central differences; ``state_at(t)`` builds the state."""
    x = np.asarray(x, dtype=float)
    drho = (state_at(t + h).rho(x) - state_at(t - h).rho(x)) / (2 * h)
    st = state_at(t)
    div = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        div = div + (current_density(st, x + e)[..., i] - current_density(st, x - e)[..., i]) / (2 * h)
    return drho + div


def qf_total(L):
    """int_0^inf Pi_QF dtau for the magnetic Gaussian."""
    return 0.5 * erf(L)
