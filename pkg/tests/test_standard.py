import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toflab.curves import hybrid_tau_grid
from toflab.exceptions import GridMismatch
from toflab.kijowski import PlaneDetector, pi_kij, separable_line_packet
from toflab.standard import (
    SMALL_ETA_TAIL,
    StdConfig,
    cumulative_integral,
    delta_well_constancy,
    gauge_dependence_metric,
    normalizability_report,
    pi_std_delta_well,
    pi_std_magnetic,
    pi_std_parabolic,
    pi_std_position_oracle,
    tail_amplitude,
)
from toflab.states import GaugeGeometry, gaussian_1d

mp = pytest.importorskip("mpmath")

# Pi_STD(eta=1, L=1, tau=1), frozen from the closed form; mpmath gives ...845
PI_STD_111 = 0.11197330804675841
# Pi_STD of the delta-well bound state at L = 1, from an mpmath rotated-contour oracle
DELTA_WELL_L1 = 0.083791075644474306


def mp_pi_std(eta, L, tau):
    mp.mp.dps = 30
    sig = 1 / (1 / mp.mpc(1, tau) + mp.mpc(0, eta))
    total = 0
    for a in (1, -1):
        f = lambda p: mp.sqrt(p) * mp.exp(-sig * p * p / 2 + 1j * a * p * L)
        total += abs(mp.quad(f, list(mp.linspace(0, 40, 81)) + [mp.inf])) ** 2
    return float(abs(sig) / (2 * mp.pi**1.5 * mp.sqrt(1 + tau * tau)) * total)


class TestPiStd:
    def test_frozen_value(self):
        assert pi_std_magnetic(1.0, 1.0, 1.0) == pytest.approx(PI_STD_111, rel=1e-13)
        assert mp_pi_std(1.0, 1.0, 1.0) == pytest.approx(PI_STD_111, rel=1e-12)

    @pytest.mark.parametrize("eta,L,tau", [(0.0, 1.0, 0.5), (0.5, 2.0, 3.0), (-1.2, 0.5, 1.5)])
    def test_mpmath_oracle(self, eta, L, tau):
        assert pi_std_magnetic(eta, L, tau) == pytest.approx(mp_pi_std(eta, L, tau), rel=1e-10)

    def test_three_routes_agree(self):
        tau = np.linspace(0, 6, 13)
        for eta, L in ((0.5, 1.0), (1.0, 3.0), (-0.7, 0.2)):
            a = pi_std_magnetic(eta, L, tau, "closed")
            np.testing.assert_allclose(pi_std_magnetic(eta, L, tau, "quad"), a, rtol=1e-9)
            np.testing.assert_allclose(pi_std_parabolic(eta, L, tau), a, rtol=1e-10)

    @pytest.mark.parametrize("eta,L,tau", [(0.0, 1.0, 1.0), (0.5, 1.0, 2.0), (1.0, 2.0, 0.5), (-0.4, 0.7, 3.0)])
    def test_position_oracle(self, eta, L, tau):
        assert pi_std_magnetic(eta, L, tau) == pytest.approx(pi_std_position_oracle(eta, L, tau), rel=1e-9)

    def test_eta_zero_is_kijowski(self):
        # at eta = 0 the z factor is the free Gaussian, so Pi_STD = Pi_Kij
        tau = np.linspace(0, 5, 11)
        kij = pi_kij(separable_line_packet(gaussian_1d(0.5)), PlaneDetector(1.0), tau)
        np.testing.assert_allclose(pi_std_magnetic(0.0, 1.0, tau), kij, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-3, 3), st.floats(0, 20), st.floats(0, 50))
    def test_positive(self, eta, L, tau):
        assert pi_std_magnetic(eta, L, tau) >= 0

    def test_negative_tau_refused(self):
        with pytest.raises(ValueError):
            pi_std_magnetic(0.5, 1.0, -1.0)
        assert pi_std_magnetic(0.5, 1.0, -1.0, allow_negative=True) > 0

    def test_large_L_stable(self):
        tau = np.linspace(50, 200, 7)
        np.testing.assert_allclose(
            pi_std_magnetic(0.5, 100.0, tau, "closed"), pi_std_magnetic(0.5, 100.0, tau, "quad"), rtol=1e-8
        )


class TestGaugeMetric:
    def test_zero_for_same_eta(self):
        g = GaugeGeometry(eta=0.5, L=1.0)
        assert gauge_dependence_metric(StdConfig(g), StdConfig(g)) == 0.0

    def test_positive_for_different_eta(self):
        a = StdConfig(GaugeGeometry(eta=0.0, L=1.0))
        b = StdConfig(GaugeGeometry(eta=0.5, L=1.0))
        peak = np.max(pi_std_magnetic(0.0, 1.0, a.tau_grid))
        assert gauge_dependence_metric(a, b) > 0.01 * peak

    def test_mismatches(self):
        a = StdConfig(GaugeGeometry(eta=0.0, L=1.0))
        with pytest.raises(GridMismatch):
            gauge_dependence_metric(a, StdConfig(GaugeGeometry(eta=0.5, L=1.0), np.linspace(0, 1, 5)))
        with pytest.raises(ValueError):
            gauge_dependence_metric(a, StdConfig(GaugeGeometry(eta=0.5, L=2.0), a.tau_grid))

    def test_bad_method(self):
        with pytest.raises(ValueError):
            StdConfig(method="spline")


class TestNormalizability:
    def test_eta_zero_converges(self):
        rep = normalizability_report(0.0, 1.0)
        assert not rep["divergent"]
        assert rep["exponent"] < -1.4

    def test_eta_half_log_growth(self):
        rep = normalizability_report(0.5, 1.0)
        assert rep["divergent"]
        assert rep["exponent"] == pytest.approx(-1.0, abs=0.01)
        assert rep["increment"] == pytest.approx(rep["increment_predicted"], rel=0.01)

    def test_eta_zero_normalized(self):
        t = hybrid_tau_grid(1e6, 2000, t_knee=10.0)
        assert cumulative_integral(0.0, 1.0, 1e6) == pytest.approx(
            np.trapezoid(pi_std_magnetic(0.0, 1.0, t), t), rel=1e-4
        )

    def test_eta_zero_with_nondetection_sums_to_one(self):
        # positive-tau density plus the negative-tau mass (the P(inf) share)
        t = hybrid_tau_grid(1e8, 3000, t_knee=10.0)
        pos = np.trapezoid(pi_std_magnetic(0.0, 1.0, t), t)
        neg = np.trapezoid(pi_std_magnetic(0.0, 1.0, -t, allow_negative=True), t)
        assert pos + neg == pytest.approx(1.0, abs=1e-3)

    def test_small_eta_tail_limit(self):
        # tau Pi_STD / sqrt(eta) -> Gamma(3/4)^2 / (sqrt(2) pi^{3/2}) with no L dependence
        assert tail_amplitude(1e-6, 1.0) == pytest.approx(SMALL_ETA_TAIL, rel=1e-3)
        assert tail_amplitude(1e-6, 0.1) == pytest.approx(SMALL_ETA_TAIL, rel=1e-3)
        assert SMALL_ETA_TAIL == pytest.approx(
            float(mp.gamma(0.75) ** 2 / (mp.sqrt(2) * mp.pi**1.5)), rel=1e-15
        )


class TestDeltaWell:
    def test_constant(self):
        rep = delta_well_constancy()
        assert rep["constant"]
        assert rep["spread"] < 1e-8
        np.testing.assert_allclose(rep["values"], DELTA_WELL_L1, rtol=1e-9)

    def test_other_L_positive(self):
        for L in (0.0, 0.5, 3.0):
            assert pi_std_delta_well(2.0, L) > 0
