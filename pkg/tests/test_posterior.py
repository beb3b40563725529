import math

import numpy as np
import pytest
from scipy import stats

from agingrate.dataset import CohortDataset
from agingrate.hazards import AgeGrid, cohort_hazard_grid
from agingrate.posterior import (
    ModelParameters,
    PriorConfig,
    log_likelihood,
    log_posterior,
    log_posterior_unconstrained,
    log_prior,
    pack_unconstrained,
    unpack_unconstrained,
)
from agingrate.walk import LatentWalk, reconstruct


def make_params(T, seed=0, sigma=0.05):
    rng = np.random.default_rng(seed)
    return ModelParameters(
        a=rng.uniform(0.03, 0.08, T),
        gamma=rng.uniform(0.05, 0.4, T),
        walk=LatentWalk(
            log_b=math.log(0.105),
            beta=0.002,
            sigma_rw=sigma,
            w=rng.laplace(0, sigma, T),
        ),
    )


def make_data(T, A, seed=0, start_age=80):
    rng = np.random.default_rng(seed + 100)
    exposures = rng.uniform(500, 2000, (T, A))
    params = make_params(T, seed)
    series = reconstruct(params.walk, np.arange(T))
    grid = AgeGrid(start_age=start_age, n_ages=A)
    lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, grid.midpoints)
    deaths = rng.poisson(lam * exposures).astype(float)
    return (
        CohortDataset(deaths=deaths, exposures=exposures, grid=grid,
                      cohorts=np.arange(1900, 1900 + T)),
        params,
    )


class TestLogLikelihood:
    def test_zero_count_cell_is_minus_rate(self):
        data, params = make_data(1, 1, seed=2)
        data.deaths[0, 0] = 0.0
        series = reconstruct(params.walk, data.cohorts)
        lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, data.grid.midpoints)
        assert log_likelihood(params, data) == pytest.approx(-lam[0, 0] * data.exposures[0, 0], rel=1e-12)

    def test_single_cell_poisson_value(self):
        # scale the exposure so the expected count is exactly 3, D = 3
        data, params = make_data(1, 1, seed=3)
        series = reconstruct(params.walk, data.cohorts)
        lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, data.grid.midpoints)[0, 0]
        data.exposures[0, 0] = 3.0 / lam
        data.deaths[0, 0] = 3.0
        expected = 3 * math.log(3) - 3 - math.log(6)
        assert expected == pytest.approx(-1.4959226, abs=1e-7)
        assert log_likelihood(params, data) == pytest.approx(expected, rel=1e-10)

    def test_empty_mask_is_zero(self):
        data, params = make_data(3, 4, seed=4)
        data.mask[:] = False
        assert log_likelihood(params, data) == 0.0

    def test_matches_scipy_poisson(self):
        data, params = make_data(4, 6, seed=5)
        series = reconstruct(params.walk, data.cohorts)
        lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, data.grid.midpoints)
        mu = lam * data.exposures
        want = stats.poisson.logpmf(data.deaths[data.mask], mu[data.mask]).sum()
        assert log_likelihood(params, data) == pytest.approx(want, rel=1e-12)

    def test_zero_rate_with_deaths_is_minus_inf(self):
        data, params = make_data(1, 1, seed=6)
        data.deaths[0, 0] = 1.0
        params.a[0] = 5e-324  # hazard underflows to an exact zero rate
        data.exposures[0, 0] = 1e-30
        assert log_likelihood(params, data) == -math.inf

    def test_factorizes_over_cohorts(self):
        data, params = make_data(5, 6, seed=7)
        total = log_likelihood(params, data)
        parts = 0.0
        for t in range(5):
            sub = CohortDataset(
                deaths=data.deaths[t : t + 1],
                exposures=data.exposures[t : t + 1],
                grid=data.grid,
                cohorts=data.cohorts[t : t + 1],
                mask=data.mask[t : t + 1],
            )
            sub_params = ModelParameters(
                a=params.a[t : t + 1],
                gamma=params.gamma[t : t + 1],
                walk=LatentWalk(
                    log_b=float(np.log(reconstruct(params.walk, data.cohorts).b_t[t])),
                    beta=0.0,
                    sigma_rw=params.walk.sigma_rw,
                    w=np.zeros(1),
                ),
            )
            parts += log_likelihood(sub_params, sub)
        assert total == pytest.approx(parts, rel=1e-10)

    def test_monotone_in_baseline(self):
        from agingrate.hazards import GompertzCohortParams, expected_deaths

        grid = AgeGrid(start_age=80, n_ages=6)
        exposures = np.full(6, 1000.0)
        low = expected_deaths(GompertzCohortParams(0.04, 0.1, 0.2), grid, exposures)
        high = expected_deaths(GompertzCohortParams(0.05, 0.1, 0.2), grid, exposures)
        assert np.all(high > low)

    def test_shape_mismatch_rejected(self):
        data, _ = make_data(3, 4, seed=8)
        with pytest.raises(ValueError):
            log_likelihood(make_params(2), data)


class TestLogPrior:
    def test_matches_scipy_stack(self):
        for seed in range(3):
            params = make_params(6, seed=seed)
            w = params.walk
            want = (
                stats.halfnorm(scale=1.0).logpdf(params.a).sum()
                + stats.gamma(a=1.0, scale=2.0).logpdf(params.gamma).sum()
                + stats.norm(scale=2.0).logpdf(w.log_b)
                + stats.norm(scale=2.0).logpdf(w.beta)
                + stats.halfnorm(scale=1.0).logpdf(w.sigma_rw)
                + stats.laplace(scale=w.sigma_rw).logpdf(w.w).sum()
            )
            assert log_prior(params) == pytest.approx(want, rel=1e-12)

    def test_gamma_prior_example(self):
        # Gamma(shape 1, rate 1/2) at 2: log(1/2) - 1
        assert stats.gamma(a=1.0, scale=2.0).logpdf(2.0) == pytest.approx(
            math.log(0.5) - 1.0, rel=1e-12
        )
        p1 = make_params(1, seed=1)
        p2 = ModelParameters(a=p1.a, gamma=np.array([2.0]), walk=p1.walk)
        p3 = ModelParameters(a=p1.a, gamma=np.array([4.0]), walk=p1.walk)
        # difference isolates the gamma term: logpdf(2) - logpdf(4) = 1
        assert log_prior(p2) - log_prior(p3) == pytest.approx(1.0, rel=1e-12)

    def test_halfnormal_density_at_origin(self):
        assert stats.halfnorm(scale=1.0).logpdf(1e-12) == pytest.approx(
            math.log(2.0 / math.sqrt(2 * math.pi)), abs=1e-9
        )

    def test_out_of_support_is_minus_inf(self):
        params = make_params(3, seed=2)
        bad = LatentWalk.__new__(LatentWalk)
        object.__setattr__(bad, "log_b", 0.0)
        object.__setattr__(bad, "beta", 0.0)
        object.__setattr__(bad, "sigma_rw", -1.0)
        object.__setattr__(bad, "w", np.zeros(3))
        broken = ModelParameters.__new__(ModelParameters)
        broken.a = params.a
        broken.gamma = params.gamma
        broken.walk = bad
        assert log_prior(broken) == -math.inf

    def test_variance_reading_switch(self):
        params = make_params(4, seed=3)
        cfg = PriorConfig(normal_scale_is_sd=False)
        want_sd = math.sqrt(2.0)
        diff = log_prior(params, cfg) - log_prior(params)
        manual = (
            stats.norm(scale=want_sd).logpdf(params.walk.log_b)
            + stats.norm(scale=want_sd).logpdf(params.walk.beta)
            - stats.norm(scale=2.0).logpdf(params.walk.log_b)
            - stats.norm(scale=2.0).logpdf(params.walk.beta)
        )
        assert diff == pytest.approx(manual, rel=1e-12)

    def test_gamma_rate_vs_scale_switch(self):
        params = make_params(4, seed=4)
        as_scale = PriorConfig(gamma_second_is_rate=False)
        # second parameter 0.5 read as the scale means rate 2
        diff = log_prior(params, as_scale) - log_prior(params)
        manual = (
            stats.gamma(a=1.0, scale=0.5).logpdf(params.gamma).sum()
            - stats.gamma(a=1.0, scale=2.0).logpdf(params.gamma).sum()
        )
        assert diff == pytest.approx(manual, rel=1e-10)


class TestLogPosterior:
    def test_is_sum_of_parts(self):
        data, params = make_data(3, 4, seed=9)
        assert log_posterior(params, data) == pytest.approx(
            log_prior(params) + log_likelihood(params, data), rel=1e-14
        )

    def test_hand_computed_toy(self):
        # 2 cohorts x 3 ages, every term rebuilt with scipy primitives
        data, params = make_data(2, 3, seed=10)
        series = reconstruct(params.walk, data.cohorts)
        lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, data.grid.midpoints)
        mu = lam * data.exposures
        by_hand = stats.poisson.logpmf(data.deaths[data.mask], mu[data.mask]).sum()
        w = params.walk
        by_hand += (
            stats.halfnorm(scale=1.0).logpdf(params.a).sum()
            + stats.gamma(a=1.0, scale=2.0).logpdf(params.gamma).sum()
            + stats.norm(scale=2.0).logpdf(w.log_b)
            + stats.norm(scale=2.0).logpdf(w.beta)
            + stats.halfnorm(scale=1.0).logpdf(w.sigma_rw)
            + stats.laplace(scale=w.sigma_rw).logpdf(w.w).sum()
        )
        assert log_posterior(params, data) == pytest.approx(by_hand, rel=1e-12)

    def test_finite_at_random_interior_point(self):
        data, params = make_data(4, 5, seed=11)
        assert math.isfinite(log_posterior(params, data))


class TestUnconstrained:
    def test_pack_unpack_roundtrip(self):
        params = make_params(5, seed=12)
        x = pack_unconstrained(params)
        back = unpack_unconstrained(x, 5)
        np.testing.assert_allclose(back.a, params.a, rtol=1e-14)
        np.testing.assert_allclose(back.gamma, params.gamma, rtol=1e-14)
        np.testing.assert_allclose(back.walk.w, params.walk.w, rtol=0)
        assert back.walk.sigma_rw == pytest.approx(params.walk.sigma_rw, rel=1e-14)

    def test_jacobian_terms(self):
        data, params = make_data(3, 4, seed=13)
        x = pack_unconstrained(params)
        T = 3
        jac = x[:T].sum() + x[T : 2 * T].sum() + x[-1]
        assert log_posterior_unconstrained(x, data) == pytest.approx(
            log_posterior(params, data) + jac, rel=1e-12
        )

    def test_nonfinite_coordinates_rejected(self):
        data, params = make_data(3, 4, seed=14)
        x = pack_unconstrained(params)
        x[0] = math.inf
        assert log_posterior_unconstrained(x, data) == -math.inf
