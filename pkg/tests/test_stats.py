import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_grover.grover import effective_polarization, q_std
from ensemble_grover.stats import (
    DispatchThresholds,
    FailureProbabilityRequest,
    Method,
    failure_probability,
    joint_distribution_two_qubit,
    joint_prob_two_qubit,
    log_binomial_tail,
    log_pfail_one_beta,
    pfail_all_bounds,
    pfail_one,
    pfail_one_beta,
    pfail_one_eps1_bound,
    pfail_one_exact,
    pfail_one_gauss,
    psall_two_qubit,
)
from oracles import mp_normal_sf, pfail_one_enumerated, pfail_one_frac, pfail_one_mp, psall_enumerated


class TestExactForm:
    def test_examples(self):
        assert pfail_one_exact(0.0, 101) == pytest.approx(0.5, rel=1e-14)
        assert pfail_one_exact(1.0, 37) == 0.0
        assert pfail_one_exact(0.2, 5) == pytest.approx(0.31744, rel=1e-14)

    @pytest.mark.parametrize("M", list(range(1, 13)))
    def test_enumeration(self, M):
        for eps in (Fraction(0), Fraction(1, 10), Fraction(1, 3), Fraction(4, 5)):
            ref = pfail_one_enumerated(eps, M)
            assert ref == pfail_one_frac(eps, M)
            assert pfail_one_exact(float(eps), M) == pytest.approx(float(ref), rel=1e-13, abs=1e-300)

    @pytest.mark.parametrize("M", [51, 200, 999, 2000, 10_000])
    def test_extended_precision_oracle_large(self, M):
        for eps in (Fraction(1, 100), Fraction(1, 20), Fraction(1, 5)):
            ref = float(pfail_one_mp(eps, M))
            assert pfail_one_exact(float(eps), M) == pytest.approx(ref, rel=1e-11, abs=1e-300)

    def test_cost_guard(self):
        with pytest.raises(ValueError):
            pfail_one_exact(0.1, 10_001)
        with pytest.raises(ValueError):
            FailureProbabilityRequest(0.1, 10_001, Method.EXACT_BINOMIAL)

    def test_tail_helper(self):
        log_half = math.log(0.5)
        assert math.exp(log_binomial_tail(10, 0, log_half, log_half)) == pytest.approx(1.0)
        assert log_binomial_tail(10, 11, log_half, log_half) == -math.inf


class TestBetaForm:
    def test_examples(self):
        assert pfail_one_beta(0.0, 7) == pytest.approx(0.5, rel=1e-14)
        assert pfail_one_beta(0.2, 5) == pytest.approx(0.31744, rel=1e-13)

    def test_deep_tail(self):
        eps, M = 0.5, 1001
        value = pfail_one_beta(eps, M)
        assert 0.0 < value < 1e-50
        assert log_pfail_one_beta(eps, M) <= -2 * M * (eps / 2) ** 2
        ref = float(pfail_one_mp(Fraction(1, 2), M))
        assert value == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("M", [2, 4, 10, 100, 1000])
    def test_even_m_equals_previous_odd(self, M):
        for eps in (0.05, 0.3, 0.9):
            assert pfail_one_beta(eps, M) == pytest.approx(pfail_one_beta(eps, M - 1), abs=1e-12)


class TestGaussianForm:
    def test_examples(self):
        assert pfail_one_gauss(0.0, 12345) == 0.5
        assert pfail_one_gauss(0.01, 10**4) == pytest.approx(float(mp_normal_sf(1.0)), rel=1e-13)
        assert pfail_one_gauss(0.01, 10**4) == pytest.approx(0.1586553, abs=1e-7)

    def test_far_tail_against_beta(self):
        gauss = pfail_one_gauss(0.01, 10**6)
        assert gauss == pytest.approx(7.62e-24, rel=0.01)
        assert gauss == pytest.approx(pfail_one_beta(0.01, 10**6), rel=0.1)


class TestDispatch:
    def test_auto(self):
        small = pfail_one(FailureProbabilityRequest(0.2, 5))
        assert small.method is Method.EXACT_BINOMIAL
        assert small.value == pytest.approx(0.31744)
        huge = pfail_one(FailureProbabilityRequest(0.0, 10**9))
        assert huge.method is Method.GAUSSIAN
        assert huge.value == 0.5
        middle = pfail_one(FailureProbabilityRequest(0.01, 5000))
        assert middle.method is Method.INCOMPLETE_BETA

    def test_forced_method(self):
        forced = pfail_one(FailureProbabilityRequest(0.2, 5, Method.INCOMPLETE_BETA))
        assert forced.method is Method.INCOMPLETE_BETA
        assert forced.value == pytest.approx(0.31744, rel=1e-13)
        assert failure_probability(0.2, 5, "gauss") == pfail_one_gauss(0.2, 5)

    def test_thresholds_are_configurable(self):
        thresholds = DispatchThresholds(exact_max=3, beta_max=10)
        assert pfail_one(FailureProbabilityRequest(0.2, 5), thresholds).method is Method.INCOMPLETE_BETA
        assert pfail_one(FailureProbabilityRequest(0.2, 11), thresholds).method is Method.GAUSSIAN

    @pytest.mark.parametrize("bad", [(-0.1, 5), (1.5, 5), (0.2, 0)])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            FailureProbabilityRequest(*bad)


class TestPerfectPolarizationBound:
    def test_direct_value(self):
        expected = math.sqrt(2 / (100 * math.pi)) * (30 / 29) * (2 / 15) ** 50
        assert pfail_one_eps1_bound(100, 16) == pytest.approx(expected, rel=1e-13)
        assert pfail_one_eps1_bound(100, 16) >= pfail_one_beta(effective_polarization(1.0, 16, 3), 100)

    def test_small_case(self):
        eps_eff = effective_polarization(1.0, 8, q_std(8))
        assert pfail_one_eps1_bound(51, 8) >= pfail_one_beta(eps_eff, 51)

    def test_vanishes_with_database_size(self):
        values = [pfail_one_eps1_bound(11, N) for N in (2**4, 2**10, 2**20, 2**40)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-50

    def test_rejects_tiny_database(self):
        with pytest.raises(ValueError):
            pfail_one_eps1_bound(5, 2)


class TestTwoQubit:
    def test_single_member_cells(self):
        for eps in (0.0, 0.3, 1.0):
            assert joint_prob_two_qubit(1, 1, 1, eps) == pytest.approx((1 + 3 * eps) / 4)
            assert joint_prob_two_qubit(0, 1, 1, eps) == pytest.approx((1 - eps) / 4)
            assert joint_prob_two_qubit(1, 0, 1, eps) == pytest.approx((1 - eps) / 4)
            assert joint_prob_two_qubit(0, 0, 1, eps) == pytest.approx((1 - eps) / 4)

    @pytest.mark.parametrize("M", [1, 2, 7, 30, 120])
    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.5, 0.95, 1.0])
    def test_marginal_is_binomial(self, M, eps):
        table = joint_distribution_two_qubit(M, eps)
        k = np.arange(M + 1)
        binom = np.array([math.comb(M, int(j)) for j in k], dtype=float)
        with np.errstate(divide="ignore"):
            ref = binom * ((1 + eps) / 2) ** k * ((1 - eps) / 2) ** (M - k)
        np.testing.assert_allclose(table.sum(axis=1), ref, atol=1e-10)
        np.testing.assert_allclose(table.sum(axis=0), ref, atol=1e-10)
        assert table.sum() == pytest.approx(1.0, abs=1e-10)

    def test_table_matches_pointwise(self):
        table = joint_distribution_two_qubit(9, 0.37)
        for k1, k2 in [(0, 0), (3, 7), (9, 9), (5, 4)]:
            assert table[k1, k2] == pytest.approx(joint_prob_two_qubit(k1, k2, 9, 0.37), rel=1e-12)

    def test_success_examples(self):
        assert psall_two_qubit(0.0, 1) == pytest.approx(0.25)
        assert psall_two_qubit(1.0, 1) == pytest.approx(1.0)
        assert psall_two_qubit(0.5, 3) == pytest.approx(float(psall_enumerated(3, Fraction(1, 2))), abs=1e-12)

    def test_success_at_full_polarization(self):
        for M in (1, 5, 51):
            assert psall_two_qubit(1.0, M) == pytest.approx(1.0, abs=1e-14)

    def test_guards(self):
        with pytest.raises(ValueError):
            psall_two_qubit(0.5, 4)
        with pytest.raises(ValueError):
            joint_prob_two_qubit(0, 0, 501, 0.5)
        with pytest.raises(ValueError):
            joint_prob_two_qubit(4, 0, 3, 0.5)


class TestBounds:
    def test_two_qubit_sandwich(self):
        lower, upper = pfail_all_bounds(0.5, 3, 4)
        assert lower <= 1 - psall_two_qubit(0.5, 3) <= upper

    def test_limits(self):
        assert pfail_all_bounds(0.0, 9, 2**10) == pytest.approx((0.5, 1.0))
        assert pfail_all_bounds(1.0, 9, 10**10) == (0.0, 0.0)


class TestProperties:
    @pytest.mark.parametrize("M", [1, 11, 101, 1001])
    def test_nonincreasing_in_eps(self, M):
        values = np.array([failure_probability(float(e), M) for e in np.linspace(0, 1, 1000)])
        assert np.all(np.diff(values) <= 0.0)

    @settings(max_examples=150)
    @given(M=st.integers(0, 600).map(lambda k: 2 * k + 1), eps=st.floats(0, 1))
    def test_parity_identity(self, M, eps):
        assert pfail_one_exact(eps, M) == pytest.approx(pfail_one_exact(eps, M + 1), abs=1e-12)

    @settings(max_examples=150)
    @given(M=st.integers(0, 400).map(lambda k: 2 * k + 1), eps=st.floats(1e-3, 0.5))
    def test_strict_step_decrease(self, M, eps):
        assert pfail_one_exact(eps, M + 2) < pfail_one_exact(eps, M)

    @settings(max_examples=100)
    @given(M=st.integers(1, 3000), eps=st.floats(0, 1))
    def test_range(self, M, eps):
        value = failure_probability(eps, M)
        assert 0.0 <= value <= 0.5
