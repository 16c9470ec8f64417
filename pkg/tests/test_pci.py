import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from cvclone import cloners, pci
from cvclone.phasespace import exact_moments


def literal_gain(n, nc, m):
    """((sqrt(N'M') - sqrt(NM)) / (N' - N))^2, valid for N != N'."""
    mc = m + nc - n
    return ((math.sqrt(nc * mc) - math.sqrt(n * m)) / (nc - n)) ** 2


class TestGain:
    def test_balanced_one_one_to_two_two(self):
        s = pci.pci_stats(pci.PCISpec(1, 1, 2))
        assert s.gain == pytest.approx(9 / 8)
        assert s.n_th_clone == pytest.approx(1 / 16)
        assert s.n_th_anticlone == pytest.approx(1 / 16)
        assert pci.balanced_noise(1, 2) == pytest.approx(1 / 16)
        assert s.clone_fidelity == pytest.approx(pci.balanced_fidelity(1, 2))

    @pytest.mark.parametrize("n,nc,m", [(2, 1, 3), (1, 3, 2), (3, 1, 5), (0, 2, 1), (4, 2, 9)])
    def test_matches_literal_formula(self, n, nc, m):
        assert pci.gain(n, nc, m) == pytest.approx(literal_gain(n, nc, m), rel=1e-12)

    @pytest.mark.parametrize("n,m", [(1, 2), (2, 7), (3, 3)])
    def test_no_conjugates_is_standard_cloning(self, n, m):
        s = pci.pci_stats(pci.PCISpec(n, 0, m))
        assert s.gain == pytest.approx(m / n)
        assert s.n_th_clone == pytest.approx(cloners.added_variance(n, m))

    @pytest.mark.parametrize("n,nc", [(1, 1), (2, 2), (1, 3), (0, 4)])
    def test_large_m_limit(self, n, nc):
        s = pci.pci_stats(pci.PCISpec(n, nc, 10**8))
        assert s.n_th_clone == pytest.approx(1 / pci.measurement_equivalent_replicas(n, nc), rel=1e-3)

    def test_spec_validation(self):
        assert pci.PCISpec(2, 1, 3).m_conj == 2
        with pytest.raises(ValueError):
            pci.PCISpec(1, 1, 2, m_conj=3)
        with pytest.raises(ValueError):
            pci.PCISpec(3, 0, 2)
        with pytest.raises(ValueError):
            pci.PCISpec(3, 1, 1)  # M' < 0
        with pytest.raises(ValueError):
            pci.PCISpec(3, 1, 2)  # would need gain < 1


class TestFractionCurve:
    @pytest.mark.parametrize("nc", range(0, 9))
    def test_agrees_with_integer_specs(self, nc):
        n, m = 8, 16
        assert pci.gain_vs_fraction(nc / n, n, m) == pytest.approx(pci.gain(n - nc, nc, m), rel=1e-12)

    def test_continuous_at_half(self):
        n, m = 8, 32
        g = pci.gain_vs_fraction(0.5, n, m)
        for eps in (1e-3, 1e-5):
            assert pci.gain_vs_fraction_direct(0.5 + eps, n, m) == pytest.approx(g, rel=10 * eps)
            assert pci.gain_vs_fraction(0.5 - eps, n, m) == pytest.approx(g, rel=10 * eps)

    @settings(deadline=None, max_examples=50)
    @given(a=st.floats(0.01, 0.99), r=st.floats(1, 50))
    def test_stable_and_direct_forms_agree(self, a, r):
        if abs(a - 0.5) < 1e-3:
            return
        assert pci.gain_vs_fraction(a, 8, 8 * r) == pytest.approx(pci.gain_vs_fraction_direct(a, 8, 8 * r), rel=1e-8)

    @pytest.mark.parametrize("mult", [1, 2, 4, 8, 1024])
    def test_common_endpoint(self, mult):
        assert pci.noise_vs_fraction(1.0, 8, 8 * mult) == pytest.approx(1 / 8, rel=1e-12)

    def test_optimal_fraction_properties(self):
        n = 8
        assert pci.optimal_fraction(n, n)[0] == pytest.approx(0.0, abs=1e-6)
        for mult in (2, 4, 8):
            a, _ = pci.optimal_fraction(n, mult * n)
            assert 0 < a < 0.5
        assert abs(pci.optimal_fraction(n, 1024 * n)[0] - 0.5) < 0.02

    def test_optimum_is_minimum_of_grid(self):
        curve = pci.fraction_curve(8, 32, 1001)
        a, noise = pci.optimal_fraction(8, 32)
        assert noise <= (curve[:, 2] ** 2).min() + 1e-12

    def test_best_integer_split_matches_continuous_optimum(self):
        a, _ = pci.optimal_fraction(8, 32)
        nc, _ = pci.best_integer_split(8, 32)
        assert abs(nc / 8 - a) <= 1 / 8


class TestComparison:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_pci_beats_standard_beyond_crossover(self, n):
        # Noise comparison reduces to M^2 - 2MN - N^2 > 0, i.e. M > (1 + sqrt 2) N.
        for m in range(2 * n, 40):
            c = pci.compare_standard(n, m)
            assert (c.pci_fidelity > c.standard_fidelity) == (m > (1 + math.sqrt(2)) * n)

    def test_counterexample_inside_two_n_plus_one(self):
        c = pci.compare_standard(3, 7)
        assert c.pci_noise == pytest.approx(16 / 588)
        assert c.standard_noise == pytest.approx(1 / 42)
        assert c.pci_fidelity < c.standard_fidelity

    def test_m_equals_2n(self):
        c = pci.compare_standard(2, 4)
        assert c.standard_noise == 0
        assert c.pci_noise == pytest.approx(1 / 32)

    def test_more_and_better_anticlones(self):
        c = pci.compare_standard(2, 9)
        assert c.pci_anticlones > c.standard_anticlones
        assert c.pci_anticlone_fidelity > c.standard_anticlone_fidelity

    def test_half_noise_limit(self):
        c = pci.compare_standard(2, 10**6)
        assert c.pci_noise / c.standard_noise == pytest.approx(0.5, abs=1e-5)


class TestCircuit:
    @pytest.mark.parametrize("n,nc,m", [(1, 1, 2), (2, 1, 3), (1, 2, 1), (2, 2, 5), (0, 2, 2), (3, 0, 4)])
    def test_exact_output_statistics(self, n, nc, m):
        spec = pci.PCISpec(n, nc, m)
        stats = pci.pci_stats(spec)
        c = pci.build_pci_circuit(spec)
        psi = 0.6 - 0.8j
        mu, cov = exact_moments(c, psi)
        target = np.sqrt(2) * np.array([psi.real, psi.imag])
        assert len(c.clones) == m and len(c.anticlones) == spec.m_conj
        for k in c.clones:
            assert mu[2 * k : 2 * k + 2] == pytest.approx(target)
            assert np.diag(cov)[2 * k : 2 * k + 2] == pytest.approx([0.5 + stats.n_th_clone] * 2)
        for k in c.anticlones:
            assert mu[2 * k : 2 * k + 2] == pytest.approx(target * [1, -1])
            assert np.diag(cov)[2 * k : 2 * k + 2] == pytest.approx([0.5 + stats.n_th_anticlone] * 2)


class TestDensities:
    def test_p_function_normalized(self):
        psi, nth = 0.3 + 0.2j, 0.25
        val, _ = dblquad(lambda y, x: pci.p_function(complex(x, y), psi, nth), -4, 4, -4, 4)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_wigner_is_p_smoothed_by_vacuum(self):
        psi, nth, at = 0.3 + 0.2j, 0.1, 0.5 - 0.1j
        # Vacuum Wigner function in alpha: exp(-2|alpha|^2) * 2/pi.
        val, _ = dblquad(
            lambda y, x: pci.p_function(complex(x, y), psi, nth)
            * 2 / np.pi * np.exp(-2 * abs(at - complex(x, y)) ** 2),
            -4, 4, -4, 4, epsabs=1e-11,
        )
        assert pci.wigner_function(at, psi, nth) == pytest.approx(val, rel=1e-7)

    def test_zero_noise_rejected(self):
        with pytest.raises(ValueError):
            pci.p_function(0j, 0j, 0.0)
