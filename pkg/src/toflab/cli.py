"""Command-line driver: distributions, the gauge figure, trajectories,
property checks and scenario reports."""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import abk, bohmian, checks, flux, kijowski, standard, states
from .curves import hybrid_tau_grid, write_csv
from .plotting import histogram_svg, overlay_svg

SCENARIOS = ("fig1", "abk_1d", "kijowski_axioms", "counterexample", "delta_well", "backflow_demo", "bohmian_mc")
DEFAULTS = {
    "eta": "0,0.5,1",
    "L": 100.0,
    "b0": 1.0,
    "tau_max": None,
    "grid": 600,
    "mc_n": 100_000,
    "seed": kijowski.CORPUS_SEED,
    "out": "out",
    "method": "closed",
    "kind": "std",
    "scenario": None,
}


def version():
    try:
        from importlib.metadata import version as v

        return v("artifact")
    except Exception:
        return "0.0.0"


def threads():
    try:
        return max(1, int(os.environ.get("TOF_LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    scenario: str = "fig1"
    geometry: states.GaugeGeometry = field(default_factory=states.GaugeGeometry)
    eta_list: tuple = (0.0, 0.5, 1.0)
    tau_max: float = None
    grid: int = 600
    mc_n: int = 100_000
    seed: int = kijowski.CORPUS_SEED
    output_dir: Path = Path("out")
    method: str = "closed"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.scenario == "fig1" and not self.eta_list:
            raise ValueError("fig1 needs at least one eta")
        if self.mc_n < 1000:
            raise ValueError("mc_n must be >= 1000")
        self.output_dir = Path(self.output_dir)

    @property
    def tau_grid(self):
        t_max = self.tau_max or 10 * max(1.0, self.geometry.L)
        return hybrid_tau_grid(t_max, self.grid)

    def metadata(self, **extra):
        g = self.geometry
        meta = {"units": g.units.mode, "L": g.L, "B0": g.B0, "method": self.method, "seed": self.seed,
                "version": version()}
        meta.update(extra)
        return meta


# ---------------------------------------------------------------------------
# config handling


def read_config(path):
    """Flat key = value file; '#' starts a comment."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise ValueError(f"bad config line: {line!r}")
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def merged(args):
    """Flags win over the config file, which wins over defaults."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for k, d in DEFAULTS.items():
        v = getattr(args, k, None)
        if v is None:
            v = conf.get(k, d)
        out[k] = v
    return out


def parse_etas(v):
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    return tuple(float(x) for x in str(v).split(",") if x.strip())


def build_config(opts, scenario):
    b0 = float(opts["b0"])
    units = states.UnitSystem("magnetic", B0=b0, b0_limit=(b0 == 0))
    etas = parse_etas(opts["eta"])
    geom = states.GaugeGeometry(eta=etas[0] if etas else 0.0, L=float(opts["L"]), B0=b0, units=units)
    return RunConfig(
        scenario=scenario,
        geometry=geom,
        eta_list=etas,
        tau_max=float(opts["tau_max"]) if opts["tau_max"] is not None else None,
        grid=int(opts["grid"]),
        mc_n=int(opts["mc_n"]),
        seed=int(opts["seed"]),
        output_dir=Path(opts["out"]),
        method=opts["method"],
    )


def _fmt_eta(eta):
    return f"{eta:g}".replace("-", "m")


# ---------------------------------------------------------------------------
# scenarios


def run_fig1(config):
    """One CSV per eta (pi_std and the gauge-invariant pi_qf), one pi_qf CSV,
    one overlay SVG and a JSON summary."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    tau = config.tau_grid
    L = config.geometry.L
    qf = flux.pi_qf_magnetic(L, tau)

    def one(eta):
        cfg = standard.StdConfig(config.geometry.with_eta(eta), tau, config.method)
        try:
            return standard.std_curve(cfg).density
        except Exception:
            # per-point evaluation so failures become gaps
            vals = np.full(tau.shape, np.nan)
            for i, t in enumerate(tau):
                try:
                    vals[i] = standard.pi_std_magnetic(eta, L, t, config.method)
                except Exception:
                    pass
            return vals

    with ThreadPoolExecutor(threads()) as pool:
        dens = list(pool.map(one, config.eta_list))

    curves = []
    for eta, d in zip(config.eta_list, dens):
        p = out / f"pi_std_eta_{_fmt_eta(eta)}.csv"
        write_csv(p, {"tau": tau, "pi_std": d, "pi_qf": qf}, config.metadata(eta=eta))
        curves.append((tau, d, f"STD eta={eta:g}"))
    write_csv(out / "pi_qf.csv", {"tau": tau, "pi_qf": qf, "cpc_ok": qf >= 0}, config.metadata(eta="any"))
    curves.append((tau, qf, "QF / BM"))
    overlay_svg(out / "fig1.svg", curves, title=f"L = {L:g}")

    # gauge check: surface-integrated current in each gauge against the closed form
    probe = tau[(tau > 0) & (qf > 1e-8 * qf.max())][:: max(1, tau.size // 25)]
    qf_dev = 0.0
    for eta in config.eta_list:
        st = states.EvolvedState(states.MagneticGaussian(eta), 0.0)
        num = np.array([flux.pi_qf(st, flux.plane(L), t) for t in probe])
        qf_dev = max(qf_dev, float(np.max(np.abs(num - flux.pi_qf_magnetic(L, probe)))))
    peak = float(np.max(dens[0]))
    sup = {f"{_fmt_eta(e)}": float(np.nanmax(np.abs(d - dens[0]))) for e, d in zip(config.eta_list, dens)}
    summary = {
        "L": L,
        "eta": list(config.eta_list),
        "peak_std_first": peak,
        "sup_diff_vs_first": sup,
        "sup_diff_std_vs_qf": {f"{_fmt_eta(e)}": float(np.nanmax(np.abs(d - qf))) for e, d in zip(config.eta_list, dens)},
        "qf_gauge_max_abs_dev": qf_dev,
        "qf_peak_tau": float(tau[int(np.argmax(qf))]),
        "gaps": int(sum(np.count_nonzero(np.isnan(d)) for d in dens)),
    }
    (out / "fig1_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_dist(config, kind):
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    tau = config.tau_grid
    L = config.geometry.L
    eta = config.eta_list[0] if config.eta_list else 0.0
    if kind == "std":
        d = standard.pi_std_magnetic(eta, L, tau, config.method)
        cols = {"tau": tau, "pi_std": d}
    elif kind == "qf":
        d = flux.pi_qf_magnetic(L, tau)
        cols = {"tau": tau, "pi_qf": d, "cpc_ok": d >= 0}
    elif kind == "bm":
        d = bohmian.pi_bm_exact(L, tau)
        cols = {"tau": tau, "pi_bm": d}
    elif kind == "kij":
        pk = states.free_gaussian(0.5)
        d = kijowski.pi_kij(pk, kijowski.PlaneDetector(L), tau)
        cols = {"tau": tau, "pi_kij": d}
    else:
        raise ValueError(f"unknown distribution {kind!r}")
    path = out / f"{kind}.csv"
    write_csv(path, cols, config.metadata(eta=eta, kind=kind))
    return path


def run_traj(config, n_dump=20):
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    L = config.geometry.L
    ens = bohmian.TrajectoryEnsemble.magnetic(config.mc_n, L, config.seed)
    t_max = config.tau_max or 3 * max(1.0, L)
    bins = np.linspace(0.0, t_max, 61)
    hist = bohmian.pi_bm_histogram(ens, L, bins)
    hist.metadata.update(config.metadata())
    hist.to_csv(out / "pi_bm_hist.csv")
    bohmian.dump_trajectories(out / "trajectories.csv", [ens.trajectory(i) for i in range(min(n_dump, ens.n))],
                              np.linspace(0, t_max, 101))
    tt = np.linspace(0, t_max, 400)
    histogram_svg(out / "pi_bm.svg", hist, (tt, bohmian.pi_bm_exact(L, tt)), title=f"L = {L:g}, n = {ens.n}")
    ks = bohmian.ks_identity(ens)
    summary = {
        "n": ens.n,
        "seed": config.seed,
        "L": L,
        "p_infinity": hist.p_infinity,
        "p_infinity_stderr": hist.p_infinity_stderr,
        "p_infinity_exact": bohmian.p_infinity_exact(L),
        "ks": ks["statistic"],
        "ks_band": ks["band"],
    }
    (out / "traj_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_scenario(config):
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    s = config.scenario
    if s == "fig1":
        return run_fig1(config)
    if s == "bohmian_mc":
        return run_traj(config)
    if s == "counterexample":
        rep = kijowski.axiom_v_counterexample_report()
        write_csv(out / "counterexample.csv", {"t": rep["t"], "t2_f0": rep["t2_f0"], "ratio": rep["ratios"]},
                  config.metadata())
        return {k: rep[k] for k in ("exponent", "f0_phi0", "truncated_integral", "analytic_tail", "T")}
    if s == "delta_well":
        rep = standard.delta_well_constancy()
        write_csv(out / "delta_well.csv", {"tau": rep["tau"], "pi_std": rep["values"]}, config.metadata(L=1.0))
        return {"spread": rep["spread"], "value": float(rep["values"][0]), "constant": rep["constant"]}
    if s == "kijowski_axioms":
        res = kijowski.axiom_suite(kijowski.packet_corpus(1000, config.seed))
        return res
    if s == "abk_1d":
        pk = abk.Line1DPacket(states.gaussian_1d(0.5, 1.0, 0.0), L=max(1.0, min(config.geometry.L, 10.0)))
        tau = hybrid_tau_grid(1e6, config.grid, t_knee=10.0, symmetric=True)
        # the negative-tau density falls like tau^-3/2, so a 1e-3 tail remains
        curve = abk.ab_curve(pk, tau, tail_tol=1e-2)
        curve.metadata.update(config.metadata(L=pk.L))
        curve.to_csv(out / "pi_ab.csv", "pi_ab")
        return {"norm": curve.norm, "p_infinity": curve.p_infinity}
    if s == "backflow_demo":
        pk = flux.backflow_packet()
        st = states.EvolvedState(pk, 0.0)
        t = np.linspace(0, 10, 201)
        jz = np.array([flux.current_density(states.EvolvedState(pk, ti), np.zeros(3))[2] for ti in t])
        res = flux.cpc_check(st, flux.plane(0.0), t, r_max=0.0, n_r=1, n_phi=1)
        write_csv(out / "backflow.csv", {"t": t, "jz_axis": jz, "cpc_ok": jz >= -res.tol}, config.metadata(L=0.0))
        return {"cpc_ok": res.ok, "t_resolution": res.t_resolution,
                "first_violation_t": None if res.ok else res.first_violation.t, "min_jz": float(jz.min())}
    raise ValueError(s)


# ---------------------------------------------------------------------------
# entry point

CHECK_SUITES = {
    "all": None,
    "kijowski-axioms": ["kijowski.axioms_i_to_iv", "kijowski.reduction_to_one_dimension"],
}


def _add_common(p):
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--eta", help="gauge parameter(s), comma separated")
    p.add_argument("--L", type=float, help="detector plane z = L")
    p.add_argument("--b0", type=float, help="field strength (0 selects the field-free limit)")
    p.add_argument("--tau-max", type=float, dest="tau_max")
    p.add_argument("--grid", type=int, help="number of tau points")
    p.add_argument("--mc-n", type=int, dest="mc_n", help="Monte-Carlo sample count")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--method", choices=("closed", "quad"))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="toflab", description="Quantum arrival-time laboratory.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("dist", help="tabulate one distribution")
    _add_common(p)
    p.add_argument("--kind", choices=("std", "qf", "bm", "kij"))
    p = sub.add_parser("fig1", help="gauge-dependence figure and CSVs")
    _add_common(p)
    p = sub.add_parser("traj", help="Bohmian ensemble histogram and trajectory dump")
    _add_common(p)
    p = sub.add_parser("check", help="run the property suite")
    _add_common(p)
    p.add_argument("suite", nargs="?", default="all", help="all, kijowski-axioms or a module name")
    p.add_argument("--corpus-n", type=int, default=1000)
    p = sub.add_parser("report", help="run a named scenario")
    _add_common(p)
    p.add_argument("--scenario", choices=SCENARIOS)

    args = parser.parse_args(argv)
    opts = merged(args)

    if args.cmd == "check":
        only = CHECK_SUITES.get(args.suite, [args.suite])
        ctx = checks.Context(seed=int(opts["seed"]), corpus_n=args.corpus_n, mc_n=int(opts["mc_n"]))
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)

        def echo(row):
            print(f"{'PASS' if row['ok'] else 'FAIL'}  {row['module']}.{row['name']}  ({row['seconds']:.2f} s)")

        ok, rows = checks.run_checks(ctx, report=out / "checks.jsonl", only=only, echo=echo)
        print(f"{sum(r['ok'] for r in rows)}/{len(rows)} properties passed")
        return 0 if ok and rows else 1

    scenario = {"fig1": "fig1", "traj": "bohmian_mc", "dist": "fig1"}.get(args.cmd)
    if args.cmd == "report":
        scenario = opts["scenario"] or "counterexample"
    config = build_config(opts, scenario)
    if args.cmd == "dist":
        print(run_dist(config, opts["kind"]))
        return 0
    result = run_scenario(config)
    print(json.dumps(checks._jsonable(result), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
