import numpy as np
import pytest

from agingrate.ppc import posterior_predictive_qq, write_qq_csv
from agingrate.sampler import PosteriorDraws, parameter_names
from agingrate.simulate import default_scenario, generate_dataset


def pseudo_draws_from_truth(truth, n=400, n_chains=2, jitter=0.0, seed=0):
    """PosteriorDraws filled with the true parameters (optionally jittered)."""
    rng = np.random.default_rng(seed)
    T = truth.a_t.size
    row = np.concatenate(
        [truth.a_t, truth.gamma_t, truth.walk.w,
         [truth.walk.log_b, truth.walk.beta, truth.walk.sigma_rw]]
    )
    draws = np.tile(row, (n_chains, n // n_chains, 1))
    if jitter:
        draws = draws * (1.0 + jitter * rng.standard_normal(draws.shape))
    return PosteriorDraws(names=parameter_names(T), draws=draws)


class TestPosteriorPredictiveQq:
    def test_rejects_small_replicate_count(self, small_sim):
        data, truth = small_sim
        draws = pseudo_draws_from_truth(truth)
        with pytest.raises(ValueError):
            posterior_predictive_qq(draws, data, n_rep=1)

    def test_rejects_empty_data(self, small_sim):
        data, truth = small_sim
        empty = type(data)(
            deaths=np.zeros_like(data.deaths),
            exposures=np.zeros_like(data.exposures),
            grid=data.grid,
            cohorts=data.cohorts,
        )
        draws = pseudo_draws_from_truth(truth)
        with pytest.raises(ValueError, match="unmasked"):
            posterior_predictive_qq(draws, empty)

    def test_zeroed_exposures_give_zero_quantiles(self, small_sim):
        data, truth = small_sim
        draws = pseudo_draws_from_truth(truth)
        zeroed = type(data)(
            deaths=np.zeros_like(data.deaths),
            exposures=data.exposures.copy(),
            grid=data.grid,
            cohorts=data.cohorts,
        )
        zeroed.exposures[:] = 0.0  # keep the mask, kill the rates
        qq = posterior_predictive_qq(draws, zeroed, n_rep=120, seed=1)
        assert np.all(qq.predicted == 0.0)
        assert np.all(qq.envelope_high == 0.0)

    def test_levels_are_plotting_positions(self, small_sim):
        data, truth = small_sim
        qq = posterior_predictive_qq(pseudo_draws_from_truth(truth), data, n_rep=150, seed=2)
        n = data.mask.sum()
        np.testing.assert_allclose(qq.levels, (np.arange(1, n + 1) - 0.5) / n)
        assert np.all(np.diff(qq.observed) >= 0)

    def test_self_consistency_calibration(self):
        # data generated from the model itself stays inside the envelope
        scenario = default_scenario(n_cohorts=8, n_ages=10, seed=21)
        data, truth = generate_dataset(scenario)
        draws = pseudo_draws_from_truth(truth, n=600, jitter=0.002, seed=3)
        qq = posterior_predictive_qq(draws, data, n_rep=400, seed=4)
        assert qq.coverage() >= 0.95

    def test_deterministic_given_seed(self, small_sim):
        data, truth = small_sim
        draws = pseudo_draws_from_truth(truth)
        q1 = posterior_predictive_qq(draws, data, n_rep=150, seed=9)
        q2 = posterior_predictive_qq(draws, data, n_rep=150, seed=9)
        np.testing.assert_array_equal(q1.predicted, q2.predicted)

    def test_median_statistic_option(self, small_sim):
        data, truth = small_sim
        draws = pseudo_draws_from_truth(truth)
        qq = posterior_predictive_qq(draws, data, n_rep=150, seed=5, statistic="median")
        # medians of integer counts land on half-integers
        assert np.all(2 * qq.predicted == np.round(2 * qq.predicted))
        with pytest.raises(ValueError):
            posterior_predictive_qq(draws, data, n_rep=150, statistic="mode")

    def test_csv_export(self, tmp_path, small_sim):
        data, truth = small_sim
        qq = posterior_predictive_qq(pseudo_draws_from_truth(truth), data, n_rep=120, seed=6)
        path = tmp_path / "qq.csv"
        write_qq_csv(qq, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "level,observed,predicted,envelope_low,envelope_high"
        assert len(lines) == 1 + qq.levels.size
