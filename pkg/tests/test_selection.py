"""Uncertainty-driven sample selection and its baselines."""

import numpy as np
import pytest

from parkmap.gp import GpHyperparams, fit
from parkmap.selection import CandidateSet, acquisition, acquisition_profile, select
from parkmap.sensing import EXTERNAL, PLATFORM, Measurement

HYPER = GpHyperparams(lengthscale_m=200.0, signal_variance=0.25, noise_variance=1e-3)


def meas(x, origin=EXTERNAL, value=0.5):
    return Measurement(position_m=x, value=value, traffic_tag=0.5, timestamp_s=0.0, origin=origin)


def candidates(*xs):
    return CandidateSet((meas(xs[0], PLATFORM),) + tuple(meas(x) for x in xs[1:]))


class TestAcquisition:
    def test_prior_deviation_everywhere_when_untrained(self):
        model = fit([], [], HYPER)
        want = np.sqrt(HYPER.signal_variance)
        for x in (0.0, 333.0, 9000.0):
            assert acquisition(model, x) == want

    def test_lower_near_data_than_far_away(self):
        model = fit([100.0, 110.0, 120.0], [0.4, 0.5, 0.6], HYPER)
        assert acquisition(model, 110.0) < acquisition(model, 5000.0)

    def test_non_negative(self):
        rng = np.random.default_rng(0)
        model = fit(rng.uniform(0, 1e4, 10), rng.uniform(0, 1, 10), HYPER)
        assert np.all(acquisition_profile(model, rng.uniform(0, 1e4, 100)) >= 0)


class TestSelect:
    def test_single_candidate_taken_by_every_strategy(self):
        model = fit([], [], HYPER)
        cs = candidates(42.0)
        rng = np.random.default_rng(1)
        for strategy in ("uncertainty", "random", "platform_only"):
            assert select(model, cs, strategy, rng) == [cs.items[0]]
        assert select(model, cs, "take_all") == list(cs.items)

    def test_untrained_model_ties_break_to_platform(self):
        model = fit([], [], HYPER)
        cs = candidates(500.0, 100.0, 900.0)
        chosen = select(model, cs, "uncertainty")
        assert chosen == [cs.items[0]]
        assert chosen[0].origin == PLATFORM

    def test_uncertainty_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            xs = rng.uniform(0, 1e4, int(rng.integers(1, 12)))
            model = fit(xs, rng.uniform(0, 1, xs.size), HYPER)
            cs = candidates(*rng.uniform(0, 1e4, 5))
            chosen = select(model, cs, "uncertainty")[0]
            scores = [acquisition(model, m.position_m) for m in cs.items]
            assert acquisition(model, chosen.position_m) >= max(scores) - 1e-12

    def test_selection_ignores_label_values(self):
        rng = np.random.default_rng(3)
        model = fit(rng.uniform(0, 1e4, 8), rng.uniform(0, 1, 8), HYPER)
        xs = rng.uniform(0, 1e4, 4)
        a = CandidateSet(tuple(meas(x, value=0.1) for x in xs))
        b = CandidateSet(tuple(meas(x, value=0.9) for x in xs))
        assert select(model, a, "uncertainty")[0].position_m == select(model, b, "uncertainty")[0].position_m

    def test_random_is_uniform(self):
        model = fit([], [], HYPER)
        cs = candidates(0.0, 1.0, 2.0, 3.0, 4.0)
        rng = np.random.default_rng(4)
        hits = np.zeros(5)
        trials = 100_000
        for _ in range(trials):
            chosen = select(model, cs, "random", rng)[0]
            hits[int(chosen.position_m)] += 1
        freqs = hits / trials
        np.testing.assert_allclose(freqs, 0.2, rtol=0.02, atol=0)

    def test_take_all_returns_everything_in_order(self):
        model = fit([], [], HYPER)
        cs = candidates(9.0, 8.0, 7.0)
        assert select(model, cs, "take_all") == list(cs.items)

    def test_platform_only_keeps_first(self):
        model = fit([], [], HYPER)
        cs = candidates(5.0, 6.0, 7.0)
        out = select(model, cs, "platform_only")
        assert out == [cs.items[0]]

    def test_empty_candidates_rejected(self):
        model = fit([], [], HYPER)
        with pytest.raises(ValueError):
            select(model, CandidateSet(()), "uncertainty")

    def test_unknown_strategy_rejected(self):
        model = fit([], [], HYPER)
        with pytest.raises(ValueError):
            select(model, candidates(1.0), "greedy")

    def test_random_without_rng_rejected(self):
        model = fit([], [], HYPER)
        with pytest.raises(ValueError):
            select(model, candidates(1.0, 2.0), "random")
