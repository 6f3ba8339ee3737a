import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from toflab.exceptions import NodeEncountered, UnsupportedFamily
from toflab.states import (
    EvolvedState,
    GaugeGeometry,
    MagneticGaussian,
    TabulatedPacket,
    UnitSystem,
    evolve_free_momentum,
    free_gaussian,
    gauge_phase,
    gaussian_1d,
    hermite_function_1d,
    magnetic_grad,
    magnetic_psi,
    magnetic_state_momentum,
    magnetic_state_position,
    polar_decompose,
    right_moving_gaussian,
    sigma_of_t,
    vector_potential,
)


class TestUnits:
    def test_magnetic_needs_positive_charge_field(self):
        with pytest.raises(ValueError):
            UnitSystem("magnetic", B0=1.0, q=-1.0)
        UnitSystem("magnetic", B0=0.0, b0_limit=True)

    def test_field_factor(self):
        assert UnitSystem("magnetic").field_factor == 1.0
        assert UnitSystem("free").field_factor == 0.0
        assert UnitSystem("magnetic", B0=0.0, b0_limit=True).field_factor == 0.0

    def test_vector_potential(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(vector_potential(x, eta=0.5), [-2.0, 1.0, -1.5])
        g = GaugeGeometry(eta=0.5)
        np.testing.assert_array_equal(g.vector_potential(x), vector_potential(x, 0.5))
        assert g.with_eta(1.0).eta == 1.0


class TestFreeEvolution:
    def test_identity_at_zero(self):
        pk = free_gaussian(0.5, 1.0)
        p = np.random.default_rng(0).normal(size=(10, 3))
        np.testing.assert_array_equal(evolve_free_momentum(pk, p, 0.0), pk.momentum(p))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3), st.floats(-20, 20))
    def test_phase_only(self, px, py, pz, t):
        pk = free_gaussian(0.4, 0.7, 0.2)
        p = np.array([px, py, pz])
        assert abs(evolve_free_momentum(pk, p, t)) == pytest.approx(abs(pk.momentum(p)), rel=1e-13, abs=1e-300)

    def test_magnetic_refused(self):
        with pytest.raises(UnsupportedFamily):
            evolve_free_momentum(MagneticGaussian(0.0), np.zeros(3), 1.0)

    def test_width_squared_at_t2(self):
        # rho_t ~ exp(-z^2/w^2) with w^2 = 1 + t^2 for psi_0 ~ exp(-z^2/2)
        Z = gaussian_1d(0.5)
        z = np.array([-0.1, 0.0, 0.1])
        lr = np.log(np.abs(Z.position(z, 2.0)) ** 2)
        second = (lr[0] - 2 * lr[1] + lr[2]) / 0.01
        assert -2 / second == pytest.approx(5.0, rel=1e-10)

    def test_width_against_numerical_fourier(self):
        # independent oracle: FFT of the initial Gaussian, multiply by the phase, invert
        n, box = 4096, 160.0
        z = (np.arange(n) - n // 2) * box / n
        psi0 = np.pi**-0.25 * np.exp(-z * z / 2)
        p = 2 * np.pi * np.fft.fftfreq(n, box / n)
        psit = np.fft.ifft(np.fft.fft(psi0) * np.exp(-0.5j * 2.0 * p * p))
        rho = np.abs(psit) ** 2
        w2 = 2 * np.sum(rho * z * z) / np.sum(rho)
        assert w2 == pytest.approx(5.0, rel=1e-9)
        np.testing.assert_allclose(psit, gaussian_1d(0.5).position(z, 2.0), atol=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 5.0, 20.0])
    def test_norm_conservation(self, t):
        Z = gaussian_1d(0.5, 1.0, 0.3)
        w = np.sqrt(1 + t * t)
        val, _ = integrate.quad(lambda z: abs(Z.position(np.array([z]), t)[0]) ** 2, -30 * w, 30 * w, limit=400)
        assert val == pytest.approx(1.0, abs=1e-6)


class TestMagnetic:
    def test_initial_condition(self):
        x = np.random.default_rng(1).normal(size=(8, 3))
        r2 = np.sum(x * x, axis=-1)
        np.testing.assert_allclose(magnetic_psi(x, 0.0), np.pi**-0.75 * np.exp(-r2 / 2), rtol=1e-15)

    def test_origin_value(self):
        v = magnetic_state_position(np.array([0.0, 0.0, 0.0]), 1.0)
        assert v == pytest.approx(np.exp(-1j) / (np.pi**0.75 * np.sqrt(1 + 1j)), rel=1e-15)

    def test_gauge_phase_exact(self):
        x = np.random.default_rng(2).normal(size=(20, 3)) * 2
        for eta in (0.3, -1.7):
            ratio = magnetic_psi(x, 1.3, eta) / magnetic_psi(x, 1.3, 0.0)
            np.testing.assert_allclose(ratio, gauge_phase(x[:, 2], eta), rtol=1e-14)
            np.testing.assert_allclose(np.abs(ratio), 1.0, rtol=1e-14)

    def test_schrodinger_residual(self):
        # i d/dt psi = (-lap/2 + i d_phi + r^2/2) psi, d_phi = x d_y - y d_x
        h = 1e-3
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.normal(size=3)
            t = rng.uniform(0.1, 3)
            dt = (magnetic_psi(x, t + h) - magnetic_psi(x, t - h)) / (2 * h)
            lap = 0.0
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                lap += (magnetic_psi(x + e, t) - 2 * magnetic_psi(x, t) + magnetic_psi(x - e, t)) / h**2
            g = magnetic_grad(x, t)
            dphi = x[0] * g[1] - x[1] * g[0]
            rhs = -0.5 * lap + 1j * dphi + 0.5 * (x[0] ** 2 + x[1] ** 2) * magnetic_psi(x, t)
            assert abs(1j * dt - rhs) < 1e-6

    def test_sigma_values(self):
        assert sigma_of_t(1.0, 0.0) == pytest.approx(1 + 1j)
        # 1 / (1/(1+i) + i) = 1 / ((1+i)/2) = 1 - i
        assert sigma_of_t(1.0, 1.0) == pytest.approx(1 - 1j, rel=1e-15)

    def test_momentum_initial(self):
        p = np.random.default_rng(4).normal(size=(6, 3))
        np.testing.assert_allclose(magnetic_state_momentum(p, 0.0), np.pi**-0.75 * np.exp(-np.sum(p * p, -1) / 2))

    @pytest.mark.parametrize("t,eta", [(0.7, 0.0), (1.5, 0.6), (3.0, -1.1)])
    def test_momentum_is_fourier_transform(self, t, eta):
        # the z factor carries everything; transverse factors are the fixed Gaussian
        z = np.linspace(-60, 60, 240001)
        dz = z[1] - z[0]
        psi_z = np.pi**-0.25 / np.sqrt(1 + 1j * t) * np.exp(-z * z / (2 * (1 + 1j * t)) - 0.5j * eta * z * z)
        for pz in (-1.3, 0.0, 0.8):
            ft = np.sum(psi_z * np.exp(-1j * pz * z)) * dz / np.sqrt(2 * np.pi)
            expect = magnetic_state_momentum(np.array([0.0, 0.0, pz]), t, eta) * np.exp(1j * t) * np.pi**0.5
            assert ft == pytest.approx(expect, abs=1e-6)

    def test_eta_zero_is_free_z_evolution(self):
        p = np.array([0.0, 0.0, 0.9])
        Z = gaussian_1d(0.5)
        ref = Z(p[2:], 1.4)[0] * gaussian_1d(0.5)(np.zeros(1))[0] ** 2
        assert magnetic_state_momentum(p, 1.4) * np.exp(1.4j) == pytest.approx(ref, rel=1e-14)


class TestPolar:
    def test_zero_phase_gradient_initially(self):
        st_ = EvolvedState(MagneticGaussian(0.0), 0.0)
        x = np.random.default_rng(5).normal(size=(10, 3))
        np.testing.assert_allclose(polar_decompose(st_, x).phase_gradient, 0.0, atol=1e-16)

    def test_dS_dz(self):
        t = 1.7
        st_ = EvolvedState(MagneticGaussian(0.0), t)
        x = np.array([0.3, -0.2, 0.9])
        gs = polar_decompose(st_, x).phase_gradient
        assert gs[2] == pytest.approx(t * x[2] / (1 + t * t), rel=1e-12)
        # finite differences of arg psi
        h = 1e-5
        e = np.array([0, 0, h])
        fd = (np.angle(magnetic_psi(x + e, t)) - np.angle(magnetic_psi(x - e, t))) / (2 * h)
        assert gs[2] == pytest.approx(fd, rel=1e-7)

    def test_density_normalized(self):
        st_ = EvolvedState(MagneticGaussian(0.4), 1.7)
        # rho = exp(-r^2) exp(-z^2/(1+t^2)) / (pi^{3/2} sqrt(1+t^2)): integrate r and z separately
        val, _ = integrate.quad(lambda z: st_.rho(np.array([0.0, 0.0, z])) * np.pi, -50, 50)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_node_raises(self):
        st_ = EvolvedState(MagneticGaussian(0.0), 0.0)
        with pytest.raises(NodeEncountered) as exc:
            polar_decompose(st_, np.array([0.0, 0.0, 40.0]))
        assert exc.value.t == 0.0


class TestPackets:
    def test_normalization_checked(self):
        with pytest.raises(ValueError):
            TabulatedPacket([0, 1], [0, 1], [0, 1], 2 * np.ones((2, 2, 2)))

    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_hermite_norm(self, n):
        assert hermite_function_1d(n, 0.7).norm2() == pytest.approx(1.0, abs=1e-13)

    def test_right_moving(self):
        pk = right_moving_gaussian()
        assert pk.norm2() == pytest.approx(1.0, abs=1e-14)
        assert pk.momentum(np.array([0.1, 0.0, -0.5])) == 0

    def test_tabulated_roundtrip(self, tmp_path):
        ax = np.linspace(-6, 6, 25)
        P = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1)
        vals = np.pi**-0.75 * np.exp(-np.sum(P * P, -1) / 2 + 0.3j * P[..., 2])
        path = tmp_path / "packet.csv"
        rows = np.column_stack([P.reshape(-1, 3), vals.real.ravel(), vals.imag.ravel()])
        np.savetxt(path, rows, delimiter=",", header="px,py,pz,re,im", comments="")
        pk = TabulatedPacket.from_csv(path, renormalize=True)
        q = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5], [ax[3], ax[7], ax[11]]])
        got = pk.momentum(q)
        assert got[2] == pytest.approx(vals[3, 7, 11] / np.sqrt(pk._grid_norm2(vals)), rel=1e-12)
        assert abs(got[1]) > 0
