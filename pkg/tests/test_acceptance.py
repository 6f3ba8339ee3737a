"""The nine acceptance criteria at their stated tolerances and time budgets.

Each test records one "PASS n ..." or "FAIL n ..." line, printed in the
terminal summary, and then asserts the same verdict.
"""

import json
import time

import numpy as np
import pytest
from scipy import special

from toflab import abk, bohmian, cli, flux, kijowski, standard, states
from toflab.curves import read_csv


@pytest.fixture
def verdict(record_property):
    def record(n, ok, budget, elapsed, detail):
        ok = bool(ok) and elapsed < budget
        line = f"{'PASS' if ok else 'FAIL'} {n}  {detail}  [{elapsed:.1f} s / {budget:g} s budget]"
        record_property("acceptance", line)
        print(line)
        assert ok, line

    return record


def test_1_counterexample(verdict):
    t0 = time.perf_counter()
    phi = states.right_moving_gaussian()
    t = np.array([0.0, 1.0, np.sqrt(3.0), 10.0, 100.0])
    ratio = kijowski.f0_right(phi, t=t) / kijowski.f0_right(phi, t=0.0)
    err = float(np.max(np.abs(ratio / (1 + t * t) ** -0.75 - 1)))
    rep = kijowski.axiom_v_counterexample_report()
    ok = err <= 1e-6 and abs(rep["exponent"] - 0.5) <= 0.05
    verdict(1, ok, 10, time.perf_counter() - t0,
            f"counterexample: max rel err {err:.1e}, exponent {rep['exponent']:.4f}")


def test_2_magnetic_qf_closed_form(verdict):
    t0 = time.perf_counter()
    worst, tails = 0.0, []
    for L in (1.0, 10.0, 100.0):
        tau = np.linspace(0.05, 3.0, 50) * max(1.0, L)
        st = states.EvolvedState(states.MagneticGaussian(0.0), 0.0)
        num = np.array([flux.pi_qf(st, flux.plane(L), t) for t in tau])
        exact = flux.pi_qf_magnetic(L, tau)
        worst = max(worst, float(np.max(np.abs(num / exact - 1))))
        T = 1e3 * max(1.0, L)
        tails.append(flux.pi_qf(st, flux.plane(L), T) * np.sqrt(np.pi) * T * T / L)
    tail_err = float(np.max(np.abs(np.array(tails) - 1)))
    ok = worst <= 1e-6 and tail_err <= 0.01
    verdict(2, ok, 60, time.perf_counter() - t0,
            f"QF closed form: max rel err {worst:.1e}, tail ratio dev {tail_err:.1e}")


def test_3_gauge(verdict):
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=[kijowski.CORPUS_SEED, 3]))
    dj = dv = 0.0
    for _ in range(100):
        x = rng.normal(size=3) * 1.5
        t, eta = rng.uniform(0, 10), rng.uniform(-3, 3)
        a = states.EvolvedState(states.MagneticGaussian(0.0), t, 0.0)
        b = states.EvolvedState(states.MagneticGaussian(eta), t, eta)
        dj = max(dj, float(np.max(np.abs(flux.current_density(a, x) - flux.current_density(b, x)))))
        dv = max(dv, float(np.max(np.abs(bohmian.guiding_velocity(a, x) - bohmian.guiding_velocity(b, x)))))
    rel = {}
    for L in (1.0, 100.0):
        tau = np.linspace(0.0, 10.0 * max(1.0, L), 801)
        p0 = standard.pi_std_magnetic(0.0, L, tau)
        p1 = standard.pi_std_magnetic(0.5, L, tau)
        rel[L] = float(np.max(np.abs(p1 - p0)) / np.max(p0))
    ok = dj <= 1e-10 and dv <= 1e-10 and all(r > 0.01 for r in rel.values())
    verdict(3, ok, 60, time.perf_counter() - t0,
            f"gauge: |dJ| {dj:.1e}, |dv| {dv:.1e}, STD sup diff / peak L=1 {rel[1.0]:.3f}, L=100 {rel[100.0]:.3f}")


def test_4_unnormalizability(verdict):
    t0 = time.perf_counter()
    rep = standard.normalizability_report(0.5, 1.0)
    c_target = np.sqrt(0.5) * 0.19 * np.exp(-0.5)
    c_ok = abs(rep["c"] / c_target - 1) <= 0.10
    inc_ok = abs(rep["increment"] / (rep["c"] * np.log(2)) - 1) <= 0.15
    verdict(4, c_ok and inc_ok, 120, time.perf_counter() - t0,
            f"tail: c {rep['c']:.5f} vs {c_target:.5f} (ratio {rep['c'] / c_target:.3f}), "
            f"exponent {rep['exponent']:.4f}, doubling adds {rep['increment']:.5f} vs c ln2 "
            f"{rep['c'] * np.log(2):.5f}")


def test_5_bohmian_identity(verdict):
    t0 = time.perf_counter()
    n, L = 100_000, 100.0
    ens = bohmian.TrajectoryEnsemble.magnetic(n, L, kijowski.CORPUS_SEED)
    ks = bohmian.ks_identity(ens)
    hist = bohmian.pi_bm_histogram(ens, L, np.linspace(0, 300, 61))
    p_exact = 1 - 0.5 * special.erf(L)
    z = abs(hist.p_infinity - p_exact) / hist.p_infinity_stderr
    ok = ks["statistic"] < 1.63 / np.sqrt(n) and z <= 3
    verdict(5, ok, 120, time.perf_counter() - t0,
            f"Bohmian: KS {ks['statistic']:.5f} < {1.63 / np.sqrt(n):.5f}, p_inf {hist.p_infinity:.5f} "
            f"({z:.2f} stderr from {p_exact})")


def test_6_mean_arrival(verdict):
    t0 = time.perf_counter()
    g = states.gaussian_1d
    packets = [
        g(0.5),
        g(0.3, 0.0, 1.0),
        states.normalized(states.GaussSum1D(list(g(0.5, 0, -1).terms) + list(g(0.5, 0, 1).terms))),
        states.hermite_function_1d(1, 0.8).shifted(0.5),
        states.hermite_function_1d(2, 1.2),
    ]
    vals = [abk.abk_mean_arrival(lambda z, Z=Z: Z.position(z), 3.0, (-25, 25)) for Z in packets]
    worst = max(abs(v) for v in vals)
    verdict(6, worst <= 1e-8, 30, time.perf_counter() - t0, f"mean arrival: max |<tau>| {worst:.1e} over 5 packets")


def test_7_kijowski_axioms(verdict):
    t0 = time.perf_counter()
    res = kijowski.axiom_suite(kijowski.packet_corpus(1000))
    worst = 0.0
    for Z in (states.gaussian_1d(0.5), states.gaussian_1d(0.4, 1.5, -2.0), states.hermite_function_1d(2, 1.2)):
        t = np.linspace(-4, 4, 17)
        a = kijowski.pi_kij(kijowski.separable_line_packet(Z), kijowski.PlaneDetector(1.5), t)
        b = abk.pi_ab(abk.Line1DPacket(Z, L=1.5), t)
        worst = max(worst, float(np.max(np.abs(a - b))))
    ok = all(r["ok"] for r in res.values()) and worst <= 1e-6
    axioms = ", ".join(f"{k} {'ok' if r['ok'] else 'BAD'} ({r['n']})" for k, r in res.items())
    verdict(7, ok, 300, time.perf_counter() - t0, f"Kijowski: {axioms}; reduction {worst:.1e}")


def test_8_delta_well(verdict):
    t0 = time.perf_counter()
    rep = standard.delta_well_constancy((0.0, 1.0, 5.0, 20.0))
    ok = rep["spread"] <= 1e-8 and bool(np.all(rep["values"] > 0))
    verdict(8, ok, 5, time.perf_counter() - t0,
            f"delta well: value {rep['values'][0]:.12f}, spread {rep['spread']:.1e}")


def test_9_fig1(verdict, tmp_path):
    t0 = time.perf_counter()
    assert cli.main(["fig1", "--L", "100", "--eta", "0,0.5,1", "--out", str(tmp_path)]) == 0
    files = [tmp_path / f"pi_std_eta_{e}.csv" for e in ("0", "0.5", "1")]
    cols = [read_csv(f)[0] for f in files]
    qf_same = all(np.array_equal(c["pi_qf"], cols[0]["pi_qf"]) for c in cols)
    peak = np.max(cols[0]["pi_std"])
    diffs = [float(np.max(np.abs(c["pi_std"] - cols[0]["pi_std"])) / peak) for c in cols[1:]]
    svg = (tmp_path / "fig1.svg").read_text()
    summary = json.loads((tmp_path / "fig1_summary.json").read_text())
    ok = qf_same and all(d > 0.01 for d in diffs) and "<svg" in svg and summary["gaps"] == 0
    # no time budget is stated for this criterion
    verdict(9, ok, np.inf, time.perf_counter() - t0,
            f"fig1: QF bit-identical {qf_same}, STD sup diff / peak {', '.join(f'{d:.3f}' for d in diffs)}")
