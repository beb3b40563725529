import numpy as np
import pytest

from agingrate.stationarity import adf_test, kpss_test, write_stationarity_csv


class TestAdf:
    def test_stationary_series_rejected(self):
        rng = np.random.default_rng(0)
        r = adf_test(rng.standard_normal(200))
        assert r.reject_5pct
        assert r.p_bracket == "<=0.01"

    def test_random_walk_not_rejected(self):
        rng = np.random.default_rng(1)
        r = adf_test(np.cumsum(rng.standard_normal(200)))
        assert not r.reject_5pct

    def test_size_near_nominal(self):
        rng = np.random.default_rng(2)
        reps = 400
        rejections = sum(
            adf_test(np.cumsum(rng.standard_normal(200))).reject_5pct
            for _ in range(reps)
        )
        assert 0.02 <= rejections / reps <= 0.09

    def test_power_on_noise(self):
        rng = np.random.default_rng(3)
        reps = 200
        rejections = sum(
            adf_test(rng.standard_normal(200)).reject_5pct for _ in range(reps)
        )
        assert rejections / reps > 0.95

    def test_constant_series_degenerate(self):
        r = adf_test(np.full(50, 1.0))
        assert r.degenerate
        assert not r.reject_5pct

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            adf_test(np.arange(10, dtype=float))

    def test_p_value_in_reportable_range(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            r = adf_test(np.cumsum(rng.standard_normal(100)))
            assert 0.001 <= r.p_value <= 0.999


class TestKpss:
    def test_noise_not_rejected(self):
        rng = np.random.default_rng(15)
        r = kpss_test(rng.standard_normal(200))
        assert not r.reject_5pct

    def test_random_walk_rejected(self):
        rng = np.random.default_rng(6)
        r = kpss_test(np.cumsum(rng.standard_normal(200)))
        assert r.reject_5pct
        assert r.p_bracket == "<=0.01"

    def test_fail_to_reject_rate_at_10pct(self):
        rng = np.random.default_rng(7)
        reps = 300
        fails = sum(
            kpss_test(rng.standard_normal(200)).p_value >= 0.10 for _ in range(reps)
        )
        assert fails / reps >= 0.85

    def test_power_on_random_walk(self):
        rng = np.random.default_rng(8)
        reps = 200
        rejections = sum(
            kpss_test(np.cumsum(rng.standard_normal(200))).reject_5pct
            for _ in range(reps)
        )
        assert rejections / reps >= 0.92

    def test_constant_series(self):
        r = kpss_test(np.full(60, 2.0))
        assert r.statistic == 0.0
        assert not r.reject_5pct

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            kpss_test(np.ones(19))

    def test_auto_bandwidth_option(self):
        rng = np.random.default_rng(9)
        y = rng.standard_normal(200)
        r_auto = kpss_test(y, bandwidth="auto")
        r_fixed = kpss_test(y, bandwidth=4)
        assert not r_auto.degenerate and not r_fixed.degenerate
        assert r_auto.lags != r_fixed.lags or r_auto.statistic == r_fixed.statistic


class TestComplementarity:
    def test_walk_vs_differences_agreement(self):
        # a cumulative-Laplace series should be flagged non-stationary while
        # its first differences are flagged stationary, jointly in >= 90% of
        # simulations.  One test raising its flag suffices for the
        # non-stationary verdict; the stationary verdict wants both tests to
        # concur (a strict four-way conjunction of 5%-level decisions could
        # never exceed 0.95^4).
        rng = np.random.default_rng(10)
        agree = 0
        reps = 500
        for _ in range(reps):
            walk = np.cumsum(rng.laplace(0, 0.04, 200))
            level_nonstat = (not adf_test(walk).reject_5pct) or kpss_test(walk).reject_5pct
            diffs = np.diff(walk)
            diff_stat = adf_test(diffs).reject_5pct and not kpss_test(diffs).reject_5pct
            agree += level_nonstat and diff_stat
        assert agree / reps >= 0.90

    def test_directions_are_opposite(self):
        rng = np.random.default_rng(11)
        noise = rng.standard_normal(300)
        walk = np.cumsum(noise)
        assert adf_test(noise).reject_5pct and not kpss_test(noise).reject_5pct
        assert not adf_test(walk).reject_5pct and kpss_test(walk).reject_5pct


def test_csv_export(tmp_path):
    rng = np.random.default_rng(12)
    results = [adf_test(rng.standard_normal(100)), kpss_test(rng.standard_normal(100))]
    path = tmp_path / "stationarity.csv"
    write_stationarity_csv(results, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("test,statistic,p_value,p_bracket")
    assert len(lines) == 3
    assert lines[1].startswith("ADF") and lines[2].startswith("KPSS")
