"""Bohmian trajectories, the equilibrium ensemble and its arrival-time
statistics.

For the magnetic Gaussian the guiding field is v = (y, -x, t z/(1+t^2)) in
every gauge, so R_t = R_0, Phi_t = Phi_0 - t and Z_t = Z_0 sqrt(1+t^2).
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .curves import DistributionCurve, write_csv
from .exceptions import NodeEncountered
from .flux import pi_qf_magnetic, qf_cdf
from .states import EvolvedState, MagneticGaussian, cylindrical_to_cartesian, polar_decompose

NEVER = np.inf
T_MAX = 1e3
CHUNK = 4096
KS_99 = 1.63


def guiding_velocity(state, x, A=None):
    """v = grad S - qA at points x[..., 3]; NodeEncountered at nodes."""
    pd = polar_decompose(state, x)
    A = state.vector_potential if A is None else A
    return pd.phase_gradient - A(np.asarray(x, dtype=float))


def cartesian_to_cylindrical(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = np.hypot(x[..., 0], x[..., 1])
    out[..., 1] = np.arctan2(x[..., 1], x[..., 0])
    out[..., 2] = x[..., 2]
    return out


def magnetic_helix(X0, t):
    """(R_0, Phi_0 - t, Z_0 sqrt(1+t^2)); Phi is not wrapped."""
    X0 = np.asarray(X0, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.empty(np.broadcast_shapes(X0.shape, t.shape + (3,)))
    out[..., 0] = X0[..., 0]
    out[..., 1] = X0[..., 1] - t
    out[..., 2] = X0[..., 2] * np.sqrt(1 + t * t)
    return out


@dataclass
class BohmianTrajectory:
    """X0 in cylindrical coordinates; ``path(t)`` returns (r, phi, z)."""

    X0: np.ndarray
    path: object
    arrival_time: float = NEVER
    crossings: int = 0
    censored: bool = False
    truncated_at: float = None
    t_max: float = T_MAX


def arrival_time_of(X0, L):
    """sqrt((L/Z_0)^2 - 1) for 0 < Z_0 <= L, otherwise NEVER.  Vectorized over X0."""
    X0 = np.asarray(X0, dtype=float)
    z = X0[..., 2]
    ok = (z > 0) & (z <= L)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.sqrt(np.maximum((L / z) ** 2 - 1, 0.0))
    out = np.where(ok, tau, NEVER)
    return out if out.ndim else float(out)


def integrate_trajectory(X0, spec, t_max=T_MAX, L=None, gauge_eta=0.0, method="auto", rtol=1e-11, atol=1e-12):
    """Trajectory from cylindrical X0 in the guiding field of ``spec``.

    ``method="auto"`` takes the exact helix for the magnetic Gaussian and
    adaptive Runge-Kutta otherwise.  With a plane z = L every crossing is
    located by root finding on the dense output; the first one is the
    arrival time and the count is kept.  A node hit mid-flight truncates the
    trajectory and is flagged.
    """
    X0 = np.asarray(X0, dtype=float)
    magnetic = isinstance(spec, MagneticGaussian)
    if method == "auto":
        method = "analytic" if magnetic else "numeric"
    if method == "analytic":
        if not magnetic:
            raise ValueError("analytic trajectories exist only for the magnetic Gaussian")
        tau = arrival_time_of(X0, L) if L is not None else NEVER
        return BohmianTrajectory(X0, lambda t: magnetic_helix(X0, t), tau, int(np.isfinite(tau)), t_max=t_max)

    def rhs(t, y):
        return guiding_velocity(EvolvedState(spec, t, gauge_eta), y)

    events = []
    if L is not None:
        ev = lambda t, y: y[2] - L
        events.append(ev)
    y0 = cylindrical_to_cartesian(X0)
    truncated = None
    try:
        sol = integrate.solve_ivp(rhs, (0.0, t_max), y0, method="DOP853", rtol=rtol, atol=atol,
                                  dense_output=True, events=events or None)
    except NodeEncountered as exc:
        # rerun up to just before the node
        truncated = exc.t
        sol = integrate.solve_ivp(rhs, (0.0, 0.999 * exc.t), y0, method="DOP853", rtol=rtol, atol=atol,
                                  dense_output=True, events=events or None)
    dense = sol.sol

    def path(t):
        return cartesian_to_cylindrical(dense(t).T) if np.ndim(t) else cartesian_to_cylindrical(dense(t))

    tau, count, censored = NEVER, 0, False
    if L is not None:
        hits = sol.t_events[0]
        if abs(y0[2] - L) == 0:
            hits = np.concatenate([[0.0], hits])
        count = len(hits)
        if count:
            tau = float(hits[0])
        else:
            # never, unless still heading for the plane at the horizon
            y_end = sol.y[:, -1]
            v_end = rhs(sol.t[-1], y_end) if truncated is None else np.zeros(3)
            censored = bool(np.sign(L - y_end[2]) * v_end[2] > 0) or truncated is not None
    return BohmianTrajectory(X0, path, tau, count, censored, truncated, t_max)


# ---------------------------------------------------------------------------
# Equilibrium ensemble


def _chunk_rng(seed, chunk):
    return np.random.Generator(np.random.Philox(key=[seed, chunk]))


def sample_magnetic_rho0(n, seed):
    """Cylindrical samples of pi^{-3/2} exp(-r^2 - z^2): r^2 ~ Exp(1),
    phi uniform, z ~ N(0, 1/2).  Counter-based per fixed-size chunk, so any
    split of the work reproduces the same samples."""
    out = np.empty((n, 3))
    for c, start in enumerate(range(0, n, CHUNK)):
        m = min(CHUNK, n - start)
        rng = _chunk_rng(seed, c)
        block = rng.random((CHUNK, 3))[:m]
        out[start:start + m, 0] = np.sqrt(-np.log1p(-block[:, 0]))
        out[start:start + m, 1] = 2 * np.pi * block[:, 1]
        out[start:start + m, 2] = stats.norm.ppf(block[:, 2]) / np.sqrt(2)
    return out


@dataclass
class TrajectoryEnsemble:
    """Equilibrium initial conditions and their arrival times at z = L."""

    X0: np.ndarray
    seed: int
    L: float
    arrival: np.ndarray = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ensemble needs n >= 1")
        if self.arrival is None:
            self.arrival = arrival_time_of(self.X0, self.L)

    @property
    def n(self):
        return int(self.X0.shape[0])

    @classmethod
    def magnetic(cls, n, L, seed):
        return cls(sample_magnetic_rho0(n, seed), seed, L)

    @property
    def samples(self):
        return [self.trajectory(i) for i in range(self.n)]

    def trajectory(self, i):
        X0 = self.X0[i]
        return BohmianTrajectory(X0, lambda t: magnetic_helix(X0, t), float(self.arrival[i]),
                                 int(np.isfinite(self.arrival[i])))


@dataclass
class BohmianHistogram(DistributionCurve):
    tau_lo: np.ndarray = None
    tau_hi: np.ndarray = None
    mc_stderr: np.ndarray = None
    p_infinity_stderr: float = None

    def to_csv(self, path, value_name="density", extra=None):
        write_csv(path, {"tau_lo": self.tau_lo, "tau_hi": self.tau_hi, "density": self.density,
                         "mc_stderr": self.mc_stderr}, self.metadata)


def pi_bm_histogram(ensemble, L, bins):
    """Arrival-time histogram density with per-bin Monte-Carlo standard errors."""
    bins = np.asarray(bins, dtype=float)
    tau = ensemble.arrival if L == ensemble.L else arrival_time_of(ensemble.X0, L)
    n = ensemble.n
    counts, _ = np.histogram(tau[np.isfinite(tau)], bins)
    width = np.diff(bins)
    p = counts / n
    p_inf = float(np.mean(~np.isfinite(tau)))
    return BohmianHistogram(
        tau_grid=0.5 * (bins[:-1] + bins[1:]),
        density=p / width,
        label="pi_bm",
        p_infinity=p_inf,
        metadata={"L": L, "n": n, "seed": ensemble.seed},
        tau_lo=bins[:-1],
        tau_hi=bins[1:],
        mc_stderr=np.sqrt(p * (1 - p) / n) / width,
        p_infinity_stderr=float(np.sqrt(p_inf * (1 - p_inf) / n)),
    )


def pi_bm_exact(L, tau):
    """theta(tau) Pi_QF(tau)."""
    tau = np.asarray(tau, dtype=float)
    out = np.where(tau >= 0, pi_qf_magnetic(L, np.abs(tau)), 0.0)
    return out if out.ndim else float(out)


def p_infinity_exact(L):
    return float(1 - qf_cdf(L, np.inf))


def ks_distance(samples, cdf, atom_at_infinity=True):
    """sup |F_n - F| for samples that may include +inf (F(inf) = 1).

    Between the largest finite sample and +inf the ECDF sits at n_f/n while F
    climbs to F(inf-), so that gap is included as well.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    fin = x[np.isfinite(x)]
    nf = fin.size
    F = cdf(fin)
    i = np.arange(1, nf + 1)
    d = max(np.max(i / n - F, initial=0.0), np.max(F - (i - 1) / n, initial=0.0))
    if atom_at_infinity and nf < n:
        d = max(d, abs(float(cdf(np.array([np.finfo(float).max]))[0]) - nf / n))
    return float(d)


def ks_identity(ensemble, L=None, conditional=False):
    """KS distance between the ensemble's arrival times and theta(tau) Pi_QF.

    By default every sample enters (never = +inf) against the CDF carrying the
    non-detection atom; ``conditional=True`` uses finite times only against
    the CDF renormalized by erf(L)/2.
    """
    L = ensemble.L if L is None else L
    tau = ensemble.arrival if L == ensemble.L else arrival_time_of(ensemble.X0, L)
    if conditional:
        tau = tau[np.isfinite(tau)]
        total = qf_cdf(L, np.inf)
        d = ks_distance(tau, lambda s: qf_cdf(L, s) / total)
    else:
        d = ks_distance(tau, lambda s: qf_cdf(L, s))
    n = int(tau.size)
    return {"statistic": d, "pvalue": float(stats.kstwo.sf(d, n)), "n": n, "band": KS_99 / np.sqrt(n)}


def equivariance_check(n=100_000, t=5.0, seed=1):
    """Push rho_0 samples along the helices to time t; KS distances of the
    r, phi and z marginals from those of rho_t."""
    X = sample_magnetic_rho0(n, seed)
    Xt = magnetic_helix(X, t)
    s = np.sqrt((1 + t * t) / 2)
    d = {
        "r": stats.kstest(Xt[:, 0], lambda r: -np.expm1(-r * r)).statistic,
        "phi": stats.kstest(np.mod(Xt[:, 1], 2 * np.pi), stats.uniform(0, 2 * np.pi).cdf).statistic,
        "z": stats.kstest(Xt[:, 2], stats.norm(0, s).cdf).statistic,
    }
    band = KS_99 / np.sqrt(n)
    return {"distances": d, "band": band, "ok": all(v < band for v in d.values())}


def dump_trajectories(path, trajectories, t_grid):
    """CSV of id, t, r, phi, z on a (decimated) time grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    cols = {"id": [], "t": [], "r": [], "phi": [], "z": []}
    for i, tr in enumerate(trajectories):
        X = np.asarray(tr.path(t_grid)).reshape(t_grid.size, 3)
        cols["id"].extend([i] * t_grid.size)
        cols["t"].extend(t_grid)
        cols["r"].extend(X[:, 0])
        cols["phi"].extend(X[:, 1])
        cols["z"].extend(X[:, 2])
    write_csv(path, {k: np.asarray(v) for k, v in cols.items()})
