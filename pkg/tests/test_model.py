import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddident.model import (DelayDopplerTriplet, DelayGroup, IdentifiabilityError, ProbeSpec, SamplerSpec,
                           SystemSpec, check_identifiability, integer_partitions, max_group_product,
                           partition_bound_check)
from ddident.waveform import design_flat_pulse

T = 10e-6


def delta_probe(N, p, x=None):
    pulse = design_flat_pulse(p, T, 16 * p / T, taps=1)
    return ProbeSpec(pulse, np.ones(N) if x is None else x, T, p)


def system(k_nu, tau_max=10e-6, nu_max=10e3):
    taus = np.linspace(1e-6, 9e-6, len(k_nu))
    groups = [DelayGroup(t, np.linspace(-4e3, 4e3, k), np.ones(k)) for t, k in zip(taus, k_nu)]
    return SystemSpec(tuple(groups), tau_max, nu_max)


class TestTypes:
    def test_grouping_from_triplets(self):
        trips = [DelayDopplerTriplet(1e-6, 10.0, 1), DelayDopplerTriplet(2e-6, 0.0, 1j),
                 DelayDopplerTriplet(1e-6, -20.0, 2)]
        s = SystemSpec.from_triplets(trips, 10e-6, 1e3)
        assert s.k_tau == 2 and s.k_nu == [2, 1] and s.K == 3 and s.k_nu_max == 2
        assert sorted(t.nu for t in s.triplets()) == [-20.0, 0.0, 10.0]

    def test_rejects_duplicate_delays(self):
        g = DelayGroup(1e-6, [0.0], [1])
        with pytest.raises(ValueError, match="distinct"):
            SystemSpec((g, DelayGroup(1e-6 + 1e-13, [5.0], [1])), 10e-6, 1e3)

    def test_delays_just_outside_tolerance_are_distinct(self):
        s = SystemSpec((DelayGroup(1e-6, [0.0], [1]), DelayGroup(1e-6 + 1e-11, [0.0], [1])), 10e-6, 1e3)
        assert s.k_tau == 2

    def test_rejects_duplicate_dopplers(self):
        with pytest.raises(ValueError, match="duplicate"):
            DelayGroup(1e-6, [3.0, 3.0], [1, 1])

    @pytest.mark.parametrize("tau,nu", [(-1e-7, 0.0), (11e-6, 0.0), (1e-6, 600.0)])
    def test_assumption_a1(self, tau, nu):
        with pytest.raises(ValueError):
            SystemSpec((DelayGroup(tau, [nu], [1]),), 10e-6, 1e3)

    def test_pulse_energy_enforced(self):
        from ddident.model import PulseSpec
        with pytest.raises(ValueError, match="energy"):
            PulseSpec(np.ones(3), 1.0)

    def test_raised_cosine_default_channels(self):
        assert SamplerSpec("raised_cosine_rolloff1").channels(6) == (2, 3, 4, 5)
        assert SamplerSpec().channels(4) == (1, 2, 3, 4)
        with pytest.raises(ValueError):
            SamplerSpec(active_channels=(0, 1)).channels(4)

    def test_sorted_orders_groups(self):
        s = SystemSpec((DelayGroup(5e-6, [2.0, -1.0], [1, 2]), DelayGroup(1e-6, [0.0], [3])), 10e-6, 10.0)
        ss = s.sorted()
        assert list(ss.delays) == [1e-6, 5e-6]
        assert list(ss.groups[1].nus) == [-1.0, 2.0] and list(ss.groups[1].alphas) == [2, 1]


class TestIdentifiability:
    def test_reference_setup(self):
        rep = check_identifiability(system([3, 3]), delta_probe(30, 4))
        assert rep.tw_product == pytest.approx(240 * math.pi)
        assert rep.thm1_bound == pytest.approx(48 * math.pi)
        assert rep.satisfies_thm1 and rep.p_ok and rep.n_ok and rep.a2_ok
        assert "Theorem 1: satisfied (𝒯𝒲 ≈ 240π ≥ 48π)" in rep.summary()

    def test_boundary_equality(self):
        rep = check_identifiability(system([1]), delta_probe(2, 2))
        assert rep.p_ok and rep.n_ok

    def test_mismatch_setup_fails_doppler_dof(self):
        rep = check_identifiability(system([2, 2, 2, 8]), delta_probe(8, 8))
        assert not rep.n_ok and not rep.satisfies_thm1
        assert "NOT satisfied" in rep.summary()

    def test_a3_ratio_reported(self):
        rep = check_identifiability(system([1], nu_max=20e3), delta_probe(4, 2))
        assert rep.a3_ratio == pytest.approx(0.2) and not rep.a3_ok
        assert "warning" in rep.summary()

    def test_delay_at_or_beyond_period_fails_a2(self):
        s = SystemSpec((DelayGroup(10e-6, [0.0], [1]),), 12e-6, 1e3)
        assert not check_identifiability(s, delta_probe(4, 2)).a2_ok

    def test_errors(self):
        with pytest.raises(IdentifiabilityError, match="even"):
            check_identifiability(system([1]), delta_probe(4, 3))
        with pytest.raises(IdentifiabilityError, match="zero"):
            check_identifiability(system([1]), delta_probe(3, 2, np.array([1, 0, 1])))
        with pytest.raises(IdentifiabilityError, match="no delay"):
            check_identifiability(SystemSpec((), 1e-6, 1.0), delta_probe(3, 2))

    def test_deterministic(self):
        s, pr = system([2, 1]), delta_probe(6, 4)
        assert check_identifiability(s, pr) == check_identifiability(s, pr)

    @given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(1, 20), st.integers(1, 6),
           st.integers(0, 10), st.integers(0, 3))
    def test_flags_monotone_in_n_and_p(self, k_nu, N, half_p, dN, dp):
        s = system(k_nu)
        lo = check_identifiability(s, delta_probe(N, 2 * half_p))
        hi = check_identifiability(s, delta_probe(N + dN, 2 * (half_p + dp)))
        for flag in ("satisfies_thm1", "satisfies_corollary", "p_ok", "n_ok", "a2_ok"):
            assert getattr(hi, flag) or not getattr(lo, flag)


class TestPartitions:
    PARTITION_COUNTS = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]

    def test_partition_counts(self):
        for n, count in enumerate(self.PARTITION_COUNTS, start=1):
            parts = list(integer_partitions(n))
            assert len(parts) == count
            assert all(sum(p) == n and p == sorted(p) for p in parts)

    @pytest.mark.parametrize("K,expected", [(1, 1), (5, 9), (6, 12)])
    def test_examples(self, K, expected):
        assert max_group_product(K) == expected
        assert partition_bound_check(K)

    @given(st.integers(1, 40))
    def test_max_product_matches_closed_search(self, K):
        brute = max(kt * (K - kt + 1) for kt in range(1, K + 1))
        assert max_group_product(K) == brute

    def test_bound_exhaustive_to_50(self):
        assert all(partition_bound_check(K) for K in range(1, 51))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            partition_bound_check(0)
