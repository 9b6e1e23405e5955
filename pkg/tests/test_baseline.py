import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddident.baseline import (LeakageGrid, MFSurface, ambiguity, assignment_cost, extract_peaks, mf_surface,
                              quantized_leakage)
from ddident.harness import NINE_T_TOTAL, NINE_W, make_probe, nine_target_system
from ddident.model import DelayGroup, SystemSpec
from ddident.waveform import apply_system, synthesize_probe

T = 10e-6


@pytest.fixture(scope="module")
def small():
    """Unit-energy probe on a short frame so the full (tau, nu) grid stays small."""
    x = synthesize_probe(make_probe(p=4, N=6, oversampling=4))
    return x.replace(x.samples / math.sqrt(x.energy))


@pytest.fixture(scope="module")
def probe_x():
    return synthesize_probe(make_probe(N=30))


def single(tau, nu, alpha=1.0):
    return SystemSpec((DelayGroup(tau, [nu], [alpha]),), 10e-6, 10e3)


class TestAmbiguity:
    def test_origin_is_energy(self, small, probe_x):
        assert ambiguity(small, 0.0, 0.0) == pytest.approx(1.0, abs=1e-6)
        assert ambiguity(probe_x, 0.0, 0.0) == pytest.approx(probe_x.energy, rel=1e-12)

    def test_volume_by_quadrature(self, small):
        n = len(small)
        taus = np.arange(n) * small.dt
        nus = np.fft.fftfreq(n, small.dt)
        A = ambiguity(small, taus, nus)
        volume = np.sum(np.abs(A) ** 2) * small.dt * (nus[1] - nus[0])
        assert volume == pytest.approx(1.0, abs=0.01)
        assert np.abs(A).max() <= abs(A[0, 0]) * (1 + 1e-12)

    def test_single_pulse_autocorrelation(self):
        x = synthesize_probe(make_probe(N=1))
        lags = np.arange(-40, 41, 3)
        A = ambiguity(x, lags * x.dt, 0.0)[:, 0]
        direct = np.array([np.sum(x.samples * np.conj(np.roll(x.samples, k))) * x.dt for k in lags])
        np.testing.assert_allclose(np.abs(A), np.abs(direct), atol=1e-9 * x.energy)

    def test_bounded_by_origin(self, probe_x):
        taus = np.linspace(-3 * T, 3 * T, 41)
        nus = np.linspace(-20e3, 20e3, 41)
        assert np.abs(ambiguity(probe_x, taus, nus)).max() <= ambiguity(probe_x, 0, 0).real * (1 + 1e-12)

    def test_conjugate_symmetry(self, probe_x):
        rng = np.random.default_rng(2)
        f0 = 1 / (len(probe_x) * probe_x.dt)  # frame-periodic Doppler grid
        for _ in range(5):
            tau = rng.uniform(-2 * T, 2 * T)
            nu = rng.integers(-200, 200) * f0
            lhs = ambiguity(probe_x, -tau, -nu)
            rhs = np.exp(-2j * np.pi * nu * tau) * np.conj(ambiguity(probe_x, tau, nu))
            assert abs(lhs - rhs) <= 1e-9 * probe_x.energy


class TestMatchedFilter:
    def test_single_target_peak(self, probe_x):
        y = apply_system(probe_x, single(3.3e-6, 2.2e3), "exact")
        gt = np.arange(0, 10e-6, 0.25e-6)
        gn = np.arange(-5e3, 5e3, 250.0)
        surf = mf_surface(y, probe_x, gt, gn)
        i, k = np.unravel_index(np.argmax(np.abs(surf.values)), surf.values.shape)
        assert abs(gt[i] - 3.3e-6) <= 0.125e-6 + 1e-15 and abs(gn[k] - 2.2e3) <= 125 + 1e-9
        (tp, np_), = extract_peaks(surf, 1)
        assert (tp, np_) == (gt[i], gn[k])

    def test_superposition(self, probe_x):
        s1, s2 = single(2.0e-6, 1e3, 1j), single(5.5e-6, -2e3, 0.5)
        both = SystemSpec(s1.groups + s2.groups, 10e-6, 10e3)
        gt = np.linspace(0, 10e-6, 11)
        gn = np.linspace(-4e3, 4e3, 9)
        chi = lambda s: mf_surface(apply_system(probe_x, s, "exact"), probe_x, gt, gn).values
        total = chi(both)
        np.testing.assert_allclose(total, chi(s1) + chi(s2), atol=1e-10 * np.abs(total).max())

    def test_matches_shifted_ambiguity(self, probe_x):
        s = single(2.5e-6, 0.0, 1.0)
        y = apply_system(probe_x, s, "exact")
        chi = mf_surface(y, probe_x, [2.5e-6, 4e-6], [0.0]).values[:, 0]
        A = ambiguity(probe_x, np.array([0.0, 1.5e-6]), 0.0)[:, 0]
        np.testing.assert_allclose(chi, A, atol=1e-9 * probe_x.energy)

    @settings(max_examples=10)
    @given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
    def test_linear_in_y(self, probe_x, a, b):
        y1 = apply_system(probe_x, single(1e-6, 500.0), "exact")
        y2 = apply_system(probe_x, single(4e-6, -800.0), "exact")
        gt, gn = [0.0, 1e-6, 4e-6], [-800.0, 0.0, 500.0]
        lhs = mf_surface(y1.replace(a * y1.samples + b * y2.samples), probe_x, gt, gn).values
        rhs = a * mf_surface(y1, probe_x, gt, gn).values + b * mf_surface(y2, probe_x, gt, gn).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))

    def test_frame_mismatch(self, probe_x):
        other = synthesize_probe(make_probe(N=10))
        with pytest.raises(ValueError):
            mf_surface(other, probe_x, [0.0], [0.0])

    def test_surface_csv(self, tmp_path):
        surf = MFSurface(np.array([0.0, 1e-6]), np.array([-1.0, 1.0]), np.array([[1, 1j], [-1, 0]], complex))
        surf.to_csv(tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "tau,nu,abs,arg" and len(lines) == 5
        assert lines[2] == "0.0,1.0,1.0," + repr(math.pi / 2)
        with pytest.raises(ValueError):
            MFSurface(np.zeros(2), np.zeros(3), np.zeros((3, 2)))


class TestPeaks:
    def test_too_many(self):
        surf = MFSurface(np.arange(3.0), np.arange(3.0), np.outer([1, 2, 1], [1, 2, 1]).astype(complex))
        assert extract_peaks(surf, 1) == [(1.0, 1.0)]
        with pytest.raises(ValueError, match="fewer than K"):
            extract_peaks(surf, 2)

    def test_order_and_suppression(self):
        v = np.zeros((6, 6))
        v[1, 1], v[1, 2], v[4, 4] = 3.0, 2.0, 5.0
        surf = MFSurface(np.arange(6.0), np.arange(6.0) * 10, v.astype(complex))
        assert extract_peaks(surf, 2) == [(4.0, 40.0), (1.0, 10.0)]

    def test_assignment_cost(self):
        truth = [(1e-6, 100.0), (5e-6, -200.0)]
        est = [(5e-6, -200.0), (1e-6 + 1e-6, 100.0)]
        total, pairs = assignment_cost(est, truth, 10e-6, 10e3)
        assert total == pytest.approx(0.1)
        assert sorted(pairs)[0][:2] == (0, 1)


class TestLeakage:
    W, TT = NINE_W, NINE_T_TOTAL

    def test_on_grid(self):
        g = quantized_leakage(single(5 / self.W, 2 / self.TT, 1j), self.W, self.TT)
        assert (g.L, g.M) == (12, 3)
        l0, m0 = 5, 2 + g.M
        assert abs(g.alphas[l0, m0] - 1j) <= 1e-12
        rest = np.abs(g.alphas).copy()
        rest[l0, m0] = 0
        assert rest.max() <= 1e-12

    def test_half_cell_off_grid(self):
        g = quantized_leakage(single(5.5 / self.W, -1 / self.TT, 0.7), self.W, self.TT)
        m0 = -1 + g.M
        assert abs(g.alphas[5, m0]) == pytest.approx(0.7 * 2 / math.pi, abs=1e-9)
        assert abs(g.alphas[6, m0]) == pytest.approx(0.7 * 2 / math.pi, abs=1e-9)

    def test_nine_targets_leak(self):
        s = nine_target_system()
        for t in s.triplets():
            g = quantized_leakage(single(t.tau, t.nu, t.alpha), self.W, self.TT)
            assert np.sum(np.abs(g.alphas) >= 0.1 * abs(t.alpha)) >= 2
        full = quantized_leakage(s, self.W, self.TT)
        assert full.alphas.shape == (full.L + 1, 2 * full.M + 1)
        np.testing.assert_allclose(full.grid_tau[1], 1 / self.W)

    @settings(max_examples=20)
    @given(st.lists(st.complex_numbers(max_magnitude=5), min_size=9, max_size=9),
           st.complex_numbers(max_magnitude=5))
    def test_linear_in_alpha(self, alphas, c):
        s = nine_target_system()
        sizes = [g.size for g in s.groups]
        def build(al):
            parts = np.split(np.asarray(al, complex), np.cumsum(sizes)[:-1])
            return SystemSpec(tuple(DelayGroup(g.tau, g.nus, a) for g, a in zip(s.groups, parts)), 10e-6, 10e3)
        base = quantized_leakage(s, self.W, self.TT).alphas
        other = quantized_leakage(build(alphas), self.W, self.TT).alphas
        combo = quantized_leakage(build(c * np.concatenate([g.alphas for g in s.groups]) + np.asarray(alphas)),
                                  self.W, self.TT).alphas
        np.testing.assert_allclose(combo, c * base + other, atol=1e-12 * (1 + np.abs(combo).max()))

    def test_csv(self, tmp_path):
        g = LeakageGrid(1, 1, np.arange(6).reshape(2, 3).astype(complex), 1e6, 1e-3)
        g.to_csv(tmp_path / "l.csv")
        lines = (tmp_path / "l.csv").read_text().splitlines()
        assert lines[0] == "l,m,tau,nu,abs,arg" and len(lines) == 7
        assert lines[1].startswith("0,-1,0.0,-1000.0,0.0")
