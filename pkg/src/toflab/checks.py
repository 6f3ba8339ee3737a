"""Registry of invariant and property checks with a JSON-lines report."""

import json
import time
from dataclasses import dataclass

import numpy as np

from . import abk, bohmian, flux, kijowski, numerics, standard, states

REGISTRY = []


@dataclass
class Context:
    seed: int = kijowski.CORPUS_SEED
    corpus_n: int = 1000
    mc_n: int = 100_000
    sigma: object = states.sigma_of_t


def register(module, name):
    def deco(fn):
        REGISTRY.append((module, name, fn))
        return fn

    return deco


def _rng(ctx, tag):
    return np.random.Generator(np.random.Philox(key=[ctx.seed, tag]))


# ---------------------------------------------------------------------------
# numerics


@register("numerics", "pcfd_recurrence")
def _pcfd_recurrence(ctx):
    z = _rng(ctx, 1).normal(size=20) * 3 + 1j * _rng(ctx, 2).normal(size=20) * 3
    nu = -1.5
    lhs = numerics.pcfd(nu + 1, z) - z * numerics.pcfd(nu, z) + nu * numerics.pcfd(nu - 1, z)
    err = float(np.max(np.abs(lhs) / (np.abs(numerics.pcfd(nu, z)) + 1e-300)))
    return err < 1e-9, {"max_rel_residual": err}


@register("numerics", "halfline_closed_vs_quad")
def _halfline(ctx):
    rng = _rng(ctx, 3)
    sig = rng.uniform(0.05, 2, 50) + 1j * rng.uniform(-3, 3, 50)
    L = rng.uniform(-5, 5, 50)
    a = numerics.halfline_sqrtp_gaussian_integral(sig, L, +1, "closed")
    b = numerics.halfline_sqrtp_gaussian_integral(sig, L, +1, "quad")
    err = float(np.max(np.abs(a - b) / np.abs(b)))
    return err < 1e-8, {"max_rel_diff": err}


# ---------------------------------------------------------------------------
# states


@register("states", "packet_norms")
def _norms(ctx):
    c = kijowski.packet_corpus(50, ctx.seed)
    err = max(abs(p.norm2() - 1) for p in c)
    return err < 1e-10, {"max_norm_error": float(err)}


@register("states", "magnetic_momentum_position_consistency")
def _mag_consistency(ctx):
    # |psi~_t|^2 integrates to 1 and the gauge factor only changes the phase
    sig = ctx.sigma(1.3, 0.4)
    n = np.sqrt(np.pi / sig.real) * abs(np.sqrt(sig) / np.sqrt(1 + 1.3j)) ** 2 / np.sqrt(np.pi)
    x = _rng(ctx, 4).normal(size=(20, 3))
    ph = np.abs(states.magnetic_psi(x, 1.3, 0.4)) - np.abs(states.magnetic_psi(x, 1.3, 0.0))
    return abs(n - 1) < 1e-12 and np.max(np.abs(ph)) < 1e-15, {"norm": float(n)}


# ---------------------------------------------------------------------------
# abk


def _real_packets():
    g = states.gaussian_1d
    return [
        g(0.5),
        g(0.3, 0.0, 1.0),
        states.normalized(states.GaussSum1D(list(g(0.5, 0, -1).terms) + list(g(0.5, 0, 1).terms))),
        states.hermite_function_1d(1, 0.8).shifted(0.5),
        states.hermite_function_1d(2, 1.2),
    ]


@register("abk", "leavens_matches_momentum_form")
def _leavens(ctx):
    pk = abk.Line1DPacket(states.gaussian_1d(0.5, 1.0, -1.0), L=2.0)
    worst = 0.0
    for t in (0.5, 1.5, 3.0):
        a = abk.pi_ab(pk, t)
        b = abk.pi_ab_leavens(lambda z: pk.amplitude.position(z, t), pk.L)
        worst = max(worst, abs(a - b) / a)
    return worst < 1e-8, {"max_rel_diff": worst}


@register("abk", "mean_arrival_vanishes_for_real_packets")
def _mean(ctx):
    vals = [abk.abk_mean_arrival(lambda z, Z=Z: Z.position(z), 3.0, (-25, 25)) for Z in _real_packets()]
    return max(abs(v) for v in vals) < 1e-8, {"values": vals}


@register("abk", "time_reversal_symmetry")
def _reversal(ctx):
    pk = abk.Line1DPacket(states.gaussian_1d(0.5, 0.7, 0.3), L=1.0)
    rev = abk.time_reversed(pk)
    t = np.linspace(0.1, 5, 9)
    err = float(np.max(np.abs(abk.pi_ab(pk, t) - abk.pi_ab(rev, -t))))
    return err < 1e-12, {"max_diff": err}


# ---------------------------------------------------------------------------
# kijowski


@register("kijowski", "axioms_i_to_iv")
def _axioms(ctx):
    res = kijowski.axiom_suite(kijowski.packet_corpus(ctx.corpus_n, ctx.seed))
    return all(r["ok"] for r in res.values()), res


@register("kijowski", "reduction_to_one_dimension")
def _reduction(ctx):
    worst = 0.0
    for Z in _real_packets() + [states.gaussian_1d(0.4, 1.5, -2.0)]:
        pk3 = kijowski.separable_line_packet(Z)
        pk1 = abk.Line1DPacket(Z, L=1.5)
        t = np.linspace(-4, 4, 17)
        worst = max(worst, float(np.max(np.abs(kijowski.pi_kij(pk3, kijowski.PlaneDetector(1.5), t) - abk.pi_ab(pk1, t)))))
    return worst < 1e-6, {"max_diff": worst}


@register("kijowski", "counterexample_decay")
def _counter(ctx):
    rep = kijowski.axiom_v_counterexample_report()
    ok = abs(rep["exponent"] - 0.5) < 0.05
    return ok, {"exponent": rep["exponent"], "integral": rep["truncated_integral"] + rep["analytic_tail"]}


# ---------------------------------------------------------------------------
# standard


@register("standard", "closed_vs_position_oracle")
def _std_oracle(ctx):
    rng = _rng(ctx, 5)
    worst = 0.0
    for _ in range(6):
        eta, L, tau = rng.uniform(-1, 1), rng.uniform(0, 4), rng.uniform(0, 4)
        sig = ctx.sigma(tau, eta)
        hp = numerics.halfline_sqrtp_gaussian_integral(sig, L, +1)
        hm = numerics.halfline_sqrtp_gaussian_integral(sig, L, -1)
        a = abs(sig) / (2 * np.pi**1.5 * np.sqrt(1 + tau * tau)) * (abs(hp) ** 2 + abs(hm) ** 2)
        b = standard.pi_std_position_oracle(eta, L, tau)
        worst = max(worst, abs(a / b - 1))
    return worst < 1e-6, {"max_rel_diff": float(worst)}


@register("standard", "closed_vs_quad")
def _std_methods(ctx):
    rng = _rng(ctx, 6)
    eta, L, tau = rng.uniform(-2, 2, 200), rng.uniform(0, 20, 200), rng.uniform(0, 100, 200)
    a = np.array([standard.pi_std_magnetic(*x) for x in zip(eta, L, tau)])
    b = np.array([standard.pi_std_magnetic(*x, method="quad") for x in zip(eta, L, tau)])
    err = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
    return err < 1e-6 and np.all(a >= 0), {"max_rel_diff": err}


@register("standard", "eta_continuity")
def _std_cont(ctx):
    tau = np.linspace(0, 20, 41)
    d = np.max(np.abs(standard.pi_std_magnetic(1e-4, 2.0, tau) - standard.pi_std_magnetic(-1e-4, 2.0, tau)))
    return d < 1e-3, {"max_diff": float(d)}


@register("standard", "delta_well_constant")
def _delta(ctx):
    rep = standard.delta_well_constancy()
    return rep["constant"], {"spread": rep["spread"], "value": float(rep["values"][0])}


# ---------------------------------------------------------------------------
# flux


def _gauge_pairs(ctx, n=100):
    rng = _rng(ctx, 7)
    for _ in range(n):
        x = rng.normal(size=3) * 1.5
        t = rng.uniform(0, 10)
        eta = rng.uniform(-2, 2)
        yield x, t, eta


@register("flux", "current_gauge_invariance")
def _j_gauge(ctx):
    worst = 0.0
    for x, t, eta in _gauge_pairs(ctx):
        a = flux.current_density(states.EvolvedState(states.MagneticGaussian(0.0), t), x)
        b = flux.current_density(states.EvolvedState(states.MagneticGaussian(eta), t), x)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst < 1e-10, {"max_diff": worst}


@register("flux", "continuity_equation")
def _continuity(ctx):
    x = _rng(ctx, 8).normal(size=(10, 3))
    worst = 0.0
    for spec in (states.MagneticGaussian(0.3), states.free_gaussian(0.5, 1.0, 0.2)):
        r = flux.continuity_residual(lambda t: states.EvolvedState(spec, t), x, 0.8)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst < 1e-4, {"max_residual": worst}


@register("flux", "qf_closed_form")
def _qf(ctx):
    st = states.EvolvedState(states.MagneticGaussian(0.5), 0.0)
    worst = 0.0
    for L in (1.0, 10.0, 100.0):
        taus = np.linspace(0.05, 3.0, 12) * max(1.0, L)
        num = np.array([flux.pi_qf(st, flux.plane(L), t) for t in taus])
        worst = max(worst, float(np.max(np.abs(num / flux.pi_qf_magnetic(L, taus) - 1))))
    return worst < 1e-6, {"max_rel_diff": worst}


@register("flux", "cpc_magnetic_holds")
def _cpc(ctx):
    res = flux.cpc_check(states.EvolvedState(states.MagneticGaussian(0.0), 0.0), flux.plane(2.0), np.linspace(0, 30, 61))
    return res.ok, {"t_resolution": res.t_resolution, "samples": res.n_samples}


@register("flux", "backflow_detected")
def _backflow(ctx):
    res = flux.cpc_check(states.EvolvedState(flux.backflow_packet(), 0.0), flux.plane(0.0), np.linspace(0, 10, 101), r_max=0.0, n_r=1, n_phi=1)
    return not res.ok, {"first_violation_t": None if res.ok else res.first_violation.t}


# ---------------------------------------------------------------------------
# bohmian


@register("bohmian", "velocity_gauge_invariance")
def _v_gauge(ctx):
    worst = 0.0
    for x, t, eta in _gauge_pairs(ctx):
        a = bohmian.guiding_velocity(states.EvolvedState(states.MagneticGaussian(0.0), t), x)
        b = bohmian.guiding_velocity(states.EvolvedState(states.MagneticGaussian(eta), t), x)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst < 1e-10, {"max_diff": worst}


@register("bohmian", "numeric_matches_helix")
def _helix(ctx):
    rng = _rng(ctx, 9)
    worst = 0.0
    ts = np.linspace(0, 50, 26)
    for _ in range(5):
        X = np.array([rng.uniform(0.2, 2), rng.uniform(0, 6), rng.normal()])
        tr = bohmian.integrate_trajectory(X, states.MagneticGaussian(rng.uniform(-1, 1)), t_max=50, method="numeric")
        a = states.cylindrical_to_cartesian(bohmian.magnetic_helix(X, ts))
        b = states.cylindrical_to_cartesian(tr.path(ts))
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst < 1e-6, {"max_error": worst}


@register("bohmian", "identity_ks")
def _ks(ctx):
    ens = bohmian.TrajectoryEnsemble.magnetic(ctx.mc_n, 100.0, ctx.seed)
    ks = bohmian.ks_identity(ens)
    h = bohmian.pi_bm_histogram(ens, 100.0, np.linspace(0, 300, 31))
    ok = ks["statistic"] < ks["band"] and abs(h.p_infinity - bohmian.p_infinity_exact(100.0)) < 3 * h.p_infinity_stderr
    return ok, {"ks": ks["statistic"], "band": ks["band"], "p_infinity": h.p_infinity}


@register("bohmian", "equivariance")
def _equiv(ctx):
    rep = bohmian.equivariance_check(ctx.mc_n, 5.0, ctx.seed)
    return rep["ok"], {k: float(v) for k, v in rep["distances"].items()}


@register("bohmian", "seeded_determinism")
def _det(ctx):
    a = bohmian.sample_magnetic_rho0(10_000, ctx.seed)
    b = bohmian.sample_magnetic_rho0(10_000, ctx.seed)
    return a.tobytes() == b.tobytes(), {}


@register("bohmian", "single_crossing")
def _single(ctx):
    X = bohmian.sample_magnetic_rho0(2000, ctx.seed)
    t = np.linspace(0, 50, 201)
    Z = X[:, 2:3] * np.sqrt(1 + t * t)
    # |Z_t| non-decreasing, so z = L is crossed at most once
    ok = bool(np.all(np.diff(np.abs(Z), axis=1) >= 0))
    return ok, {"n": int(X.shape[0])}


# ---------------------------------------------------------------------------


def run_checks(ctx=None, report=None, only=None, echo=None):
    """Run every registered property; returns (all_ok, rows)."""
    ctx = ctx or Context()
    rows = []
    for module, name, fn in REGISTRY:
        if only and module not in only and f"{module}.{name}" not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(ctx)
            err = None
        except Exception as exc:  # a crash is a failed property, reported not raised
            ok, detail, err = False, {}, f"{type(exc).__name__}: {exc}"
        row = {"module": module, "name": name, "ok": bool(ok), "seconds": round(time.perf_counter() - t0, 3),
               "detail": _jsonable(detail)}
        if err:
            row["error"] = err
        rows.append(row)
        if echo:
            echo(row)
    if report is not None:
        with open(report, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    return all(r["ok"] for r in rows), rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else str(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
