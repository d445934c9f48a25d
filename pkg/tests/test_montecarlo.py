import math

import numpy as np
import pytest
from scipy import stats as sps

from ensemble_grover.grover import q_std
from ensemble_grover.montecarlo import (
    OutcomeModel,
    TrialStats,
    comparison_sigma,
    estimate_failures,
    make_rng,
    run_protocol,
    sample_member,
    sample_members,
)
from ensemble_grover.stats import pfail_all_bounds, pfail_one_exact, psall_two_qubit


def _model(N, eps):
    return OutcomeModel(N, q_std(N), eps)


class TestModel:
    @pytest.mark.parametrize("N", [2, 4, 8, 64, 2**40])
    @pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
    def test_normalized(self, N, eps):
        model = _model(N, eps)
        assert model.p_marked + (N - 1) * model.p_other_each == pytest.approx(1.0, abs=1e-12)

    def test_two_qubit_cells(self):
        probs = OutcomeModel(4, 1, 0.5).cell_probabilities()
        np.testing.assert_allclose(probs, [0.125, 0.125, 0.125, 0.625], atol=1e-15)

    @pytest.mark.parametrize("args", [(6, 1, 0.5), (4, 1, 1.5), (2**63, 1, 0.5)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            OutcomeModel(*args)


class TestSampling:
    def test_perfect_state_always_marked(self):
        model = OutcomeModel(4, 1, 1.0)
        draws = sample_members(model, 10_000, make_rng(3))
        assert np.all(draws == 3)
        assert sample_member(model, make_rng(4)).tolist() == [1, 1]

    def test_maximally_mixed_is_uniform(self):
        model = _model(8, 0.0)
        counts = np.bincount(sample_members(model, 10**6, make_rng(11)), minlength=8)
        _, p_value = sps.chisquare(counts)
        assert p_value > 0.01

    def test_bit_marginal(self):
        model = _model(16, 0.6)
        outcomes = sample_members(model, 10**6, make_rng(5))
        wrong = np.mean(((outcomes >> 2) & 1) == 0)
        expected = (1 - model.eps_eff) / 2
        assert abs(wrong - expected) <= 3 * comparison_sigma(wrong, 10**6)

    def test_large_database_stays_cheap(self):
        model = OutcomeModel(2**46, 1, 0.5)
        draws = sample_members(model, 1000, make_rng(1))
        assert draws.min() >= 0 and draws.max() <= model.marked


class TestProtocol:
    def test_single_member_marked(self):
        model = OutcomeModel(4, 1, 1.0)
        assert run_protocol(model, 1, make_rng(0)).tolist() == [1, 1]

    def test_perfect_state_any_ensemble(self):
        # N = 4 is the case with alpha = 1, so no member can be wrong
        model = OutcomeModel(4, 1, 1.0)
        for M in (1, 2, 7, 40):
            assert run_protocol(model, M, make_rng(M)).tolist() == [1, 1]

    def test_two_qubit_success(self):
        model = OutcomeModel(4, 1, 0.5)
        stats = estimate_failures(model, 3, 10**6, seed=99)
        expected = 1 - psall_two_qubit(0.5, 3)
        assert abs(stats.all_bit_rate - expected) <= 3 * comparison_sigma(stats.all_bit_rate, 10**6)

    def test_rejects_empty_ensemble(self):
        with pytest.raises(ValueError):
            run_protocol(OutcomeModel(4, 1, 0.5), 0, make_rng(0))
        with pytest.raises(ValueError):
            estimate_failures(OutcomeModel(4, 1, 0.5), 3, 0, seed=1)


class TestEstimates:
    def test_mixed_state_all_bit_failure(self):
        stats = estimate_failures(OutcomeModel(4, 1, 0.0), 1, 10**6, seed=5)
        assert abs(stats.all_bit_rate - 0.75) <= 3 * comparison_sigma(0.75, 10**6)

    def test_single_bit_example(self):
        # N = 4, q = 1 gives eps_eff = eps
        stats = estimate_failures(OutcomeModel(4, 1, 0.2), 5, 10**6, seed=6)
        assert abs(stats.per_bit_rates[0] - 0.31744) <= 3 * comparison_sigma(0.31744, 10**6)

    def test_deterministic(self):
        model = _model(8, 0.4)
        first = estimate_failures(model, 11, 50_000, seed=42)
        assert estimate_failures(model, 11, 50_000, seed=42) == first
        assert estimate_failures(model, 11, 50_000, seed=43) != first
        assert isinstance(first, TrialStats)

    def test_worker_count_does_not_change_results(self):
        model = _model(8, 0.4)
        serial = estimate_failures(model, 301, 60_000, seed=7, workers=1)
        parallel = estimate_failures(model, 301, 60_000, seed=7, workers=3)
        assert serial == parallel

    def test_thread_env(self, monkeypatch):
        model = _model(4, 0.4)
        monkeypatch.setenv("ENSEMBLE_GROVER_THREADS", "2")
        assert estimate_failures(model, 1001, 20_000, seed=3) == estimate_failures(model, 1001, 20_000, seed=3, workers=1)

    def test_counts_are_consistent(self):
        stats = estimate_failures(_model(16, 0.3), 5, 20_000, seed=1)
        assert 0 <= stats.all_bit_failures <= stats.trials
        assert all(0 <= c <= stats.trials for c in stats.per_bit_failures)
        assert max(stats.per_bit_failures) <= stats.all_bit_failures <= sum(stats.per_bit_failures)


@pytest.mark.slow
@pytest.mark.parametrize("N", [4, 8, 16])
def test_sandwich_and_symmetry(N):
    trials = 100_000
    for M in (1, 3, 5, 11):
        for eps in (0.0, 0.3, 0.7, 1.0):
            model = _model(N, eps)
            stats = estimate_failures(model, M, trials, seed=1000 * N + M)
            one = stats.per_bit_rate
            all_rate = stats.all_bit_rate
            slack = 4 * comparison_sigma(all_rate, trials)
            assert one - slack <= all_rate <= model.n * one + slack
            # qubits are interchangeable
            rates = stats.per_bit_rates
            sig = comparison_sigma(float(rates.mean()), trials)
            assert np.ptp(rates) <= 2 * 4 * sig
            # pooled per-bit rate against the analytic value
            analytic = pfail_one_exact(model.eps_eff, M)
            assert abs(one - analytic) <= 4 * comparison_sigma(analytic, trials * model.n)
            lo, hi = pfail_all_bounds(model.eps_eff, M, N)
            assert lo - slack <= all_rate <= hi + slack
