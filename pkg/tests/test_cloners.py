import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from cvclone import cloners
from cvclone.phasespace import ModePrep, exact_moments


def _wigner(x, p, mean, cov):
    d = np.array([x, p]) - mean
    return np.exp(-0.5 * d @ np.linalg.solve(cov, d)) / (2 * np.pi * np.sqrt(np.linalg.det(cov)))


class TestFormulas:
    def test_one_to_two(self):
        assert cloners.added_variance(1, 2) == 0.5
        assert cloners.fidelity(1, 2) == pytest.approx(2 / 3)

    @pytest.mark.parametrize("n,m", [(1, 1), (1, 3), (2, 5), (3, 4), (4, 100)])
    def test_fidelity_is_gaussian_overlap_of_added_noise(self, n, m):
        v = 1 / n - 1 / m
        assert cloners.fidelity(n, m) == pytest.approx(cloners.fidelity_from_added_variances(v, v))

    def test_infinite_copies_limit(self):
        assert cloners.fidelity(1, 10**9) == pytest.approx(0.5, abs=1e-8)

    def test_invalid(self):
        with pytest.raises(ValueError):
            cloners.added_variance(3, 2)
        with pytest.raises(ValueError):
            cloners.asymmetric_variances(0, 1)

    def test_gaussian_fidelity_matches_wigner_overlap(self):
        psi = 0.3 - 0.4j
        means = np.array([0.5, -0.2])
        cov = np.array([[0.9, 0.2], [0.2, 0.7]])
        coh = np.sqrt(2) * np.array([psi.real, psi.imag])
        val, _ = dblquad(
            lambda p, x: _wigner(x, p, coh, 0.5 * np.eye(2)) * _wigner(x, p, means, cov),
            -8, 8, -8, 8, epsabs=1e-12,
        )
        assert cloners.gaussian_fidelity(psi, means, cov) == pytest.approx(2 * np.pi * val, rel=1e-8)


class TestCircuits:
    psi = 0.7 + 0.3j

    def _clone_moments(self, circuit, mode, psi=None):
        psi = self.psi if psi is None else psi
        mu, cov = exact_moments(circuit, psi)
        return mu[2 * mode : 2 * mode + 2], cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]

    def test_amplifier_cloner_exact(self):
        c = cloners.build_12_circuit()
        target = np.sqrt(2) * np.array([self.psi.real, self.psi.imag])
        for m in c.clones:
            mu, cov = self._clone_moments(c, m)
            assert mu == pytest.approx(target)
            np.testing.assert_allclose(cov, np.eye(2), atol=1e-14)  # 1/2 + 1/2
        mu, cov = self._clone_moments(c, c.anticlones[0])
        assert mu == pytest.approx(target * [1, -1])
        np.testing.assert_allclose(cov, 1.5 * np.eye(2), atol=1e-14)

    def test_canonical_unitary_equals_amplifier_circuit(self):
        a = exact_moments(cloners.build_12_circuit(), self.psi)
        b = exact_moments(cloners.build_canonical_12_circuit(), self.psi)
        np.testing.assert_allclose(a[0][:4], b[0][:4], atol=1e-14)
        np.testing.assert_allclose(a[1][:4, :4], b[1][:4, :4], atol=1e-14)

    @pytest.mark.parametrize("n,m", [(n, m) for n in (1, 2, 3, 4) for m in (1, 2, 4, 6) if m >= n])
    def test_nm_exact_added_variance(self, n, m):
        c = cloners.build_NM_circuit(n, m)
        target = np.sqrt(2) * np.array([self.psi.real, self.psi.imag])
        for k in c.clones:
            mu, cov = self._clone_moments(c, k)
            assert mu == pytest.approx(target)
            np.testing.assert_allclose(np.diag(cov) - 0.5, [1 / n - 1 / m] * 2, atol=1e-13)

    def test_asymmetric_parameters_symmetric_point(self):
        t, g, tau = cloners.asymmetric_parameters(1.0)
        assert (t, g, tau) == pytest.approx((1.0, 2.0, 0.5))

    @settings(deadline=None, max_examples=60)
    @given(chi=st.floats(0.05, 20), lam=st.floats(0.05, 20))
    def test_asymmetric_circuit_realizes_variances(self, chi, lam):
        c = cloners.build_asymmetric_circuit(chi, lam)
        bx, bp, ex, ep = cloners.asymmetric_variances(chi, lam)
        target = np.sqrt(2) * np.array([self.psi.real, self.psi.imag])
        for mode, (vx, vp) in zip(c.clones, ((bx, bp), (ex, ep))):
            mu, cov = self._clone_moments(c, mode)
            assert mu == pytest.approx(target, abs=1e-9)
            assert np.diag(cov) - 0.5 == pytest.approx([vx, vp], rel=1e-9, abs=1e-12)
        assert bx * ep == pytest.approx(0.25)
        assert bp * ex == pytest.approx(0.25)


class TestMonteCarlo:
    def test_clone_stats(self):
        psi = -0.4 + 1.1j
        stats = cloners.simulate_clones(cloners.build_12_circuit(), psi, 400_000, 3)
        for s in stats:
            assert s.var_x == pytest.approx(0.5, abs=0.01)
            assert s.var_p == pytest.approx(0.5, abs=0.01)
            assert s.fidelity == pytest.approx(2 / 3, abs=0.005)

    def test_joint_measurement_bound(self):
        c = cloners.build_12_circuit()
        sx, sp, prod = cloners.joint_measurement_check(c, 0.5 + 0.5j, 400_000, 9)
        assert prod == pytest.approx(1.0, rel=0.02)
        # Thermal noise in the splitter port makes the machine suboptimal.
        _, _, noisy = cloners.joint_measurement_check(c, 0.5 + 0.5j, 400_000, 9, {1: ModePrep.thermal(1.0)})
        assert noisy > 1.1

    def test_sumgate_and_amplifier_circuits_agree_statistically(self):
        a = cloners.simulate_clones(cloners.build_12_circuit(), 0.2j, 200_000, 1)
        b = cloners.simulate_clones(cloners.build_canonical_12_circuit(), 0.2j, 200_000, 2)
        for sa, sb in zip(a, b):
            assert sa.var_x == pytest.approx(sb.var_x, abs=0.02)
            assert sa.fidelity == pytest.approx(sb.fidelity, abs=0.01)
        assert math.isfinite(a[0].fidelity)
