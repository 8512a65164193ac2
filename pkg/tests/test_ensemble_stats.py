import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from polymer_lab import ensemble_stats as es


def test_ecdf():
    dist = es.EmpiricalDistribution.from_samples([3.0, 1.0, 2.0, 2.0])
    assert es.ecdf(dist, 0.5) == 0.0
    assert es.ecdf(dist, 2.0) == 0.75
    assert es.ecdf(dist, 10.0) == 1.0
    np.testing.assert_allclose(es.ecdf(dist, [1.0, 2.5]), [0.25, 0.75])


def test_empirical_distribution_validation():
    with pytest.raises(ValueError):
        es.EmpiricalDistribution.from_samples([])
    with pytest.raises(ValueError):
        es.EmpiricalDistribution.from_samples([1.0, np.inf])


def test_ks_of_exact_quantiles():
    m = 1000
    x = stats.norm.ppf((np.arange(m) + 0.5) / m)
    assert es.ks_distance(x, stats.norm.cdf) == pytest.approx(0.5 / m, abs=1e-12)


def test_ks_against_own_step_function():
    x = np.array([0.3, -1.2, 2.5, 0.9])
    dist = es.EmpiricalDistribution.from_samples(x)
    assert es.ks_distance(dist, lambda t: es.ecdf(dist, t)) == 0.0


def test_ks_invariant_under_increasing_maps(rng):
    x = rng.standard_normal(500)
    direct = es.ks_distance(x, stats.norm.cdf)
    mapped = es.ks_distance(np.exp(x), lambda y: stats.norm.cdf(np.log(y)))
    assert mapped == pytest.approx(direct, abs=1e-12)


def test_ks_bounds(rng):
    x = rng.uniform(size=200)
    d = es.ks_distance(x, lambda t: np.clip(t, 0.0, 1.0))
    assert 0.0 < d <= 1.0


def test_dkw_threshold():
    assert es.dkw_threshold(1000) == pytest.approx(math.sqrt(math.log(200.0) / 2000.0))
    with pytest.raises(ValueError):
        es.dkw_threshold(0)


def test_dkw_rarely_exceeded(rng):
    m = 500
    threshold = es.dkw_threshold(m)
    exceed = [es.ks_distance(rng.uniform(size=m), lambda t: np.clip(t, 0.0, 1.0)) > threshold
              for _ in range(200)]
    assert np.mean(exceed) <= 0.05


def test_two_sample_ks():
    a = np.linspace(0.0, 1.0, 50)
    stat, pvalue = es.two_sample_ks(a, a)
    assert stat == 0.0 and pvalue == pytest.approx(1.0)


def test_bootstrap_constant_sample():
    out = es.bootstrap_moments(np.full(40, 2.5), B=100)
    assert out["mean"] == es.Interval(2.5, 2.5, 2.5)
    assert out["sd"] == es.Interval(0.0, 0.0, 0.0)


def test_bootstrap_needs_enough_values():
    with pytest.raises(ValueError):
        es.bootstrap_moments(np.arange(10.0))


def test_bootstrap_sd_scales(rng):
    x = rng.standard_normal(200)
    a = es.bootstrap_moments(x, B=200, seed=3, statistics=("sd",))["sd"]
    b = es.bootstrap_moments(3.0 * x, B=200, seed=3, statistics=("sd",))["sd"]
    assert b.estimate == pytest.approx(3.0 * a.estimate, rel=1e-12)
    assert a.low <= a.estimate <= a.high


def test_bootstrap_is_reproducible(rng):
    x = rng.standard_normal(100)
    a = es.bootstrap_moments(x, B=200, seed=9)
    b = es.bootstrap_moments(x, B=200, seed=9)
    assert a == b
    assert set(a) == {"mean", "sd", "skew"}


@pytest.mark.slow
def test_bootstrap_mean_coverage(rng):
    hits = 0
    for k in range(50):
        x = rng.standard_normal(1000)
        ci = es.bootstrap_moments(x, B=500, seed=k, statistics=("mean",))["mean"]
        hits += ci.low <= 0.0 <= ci.high
    assert hits >= 40


def test_exponent_fit_exact_power_law():
    slope = 0.5 - 0.2 / 6.0
    fit = es.exponent_fit([(N, 1.7 * N ** slope) for N in (500, 2000, 8000)])
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(1.7), abs=1e-10)
    assert fit.max_residual < 1e-12
    assert fit.to_dict()["points"] == 3


def test_exponent_fit_needs_three_sizes():
    with pytest.raises(ValueError):
        es.exponent_fit([(10, 1.0), (20, 2.0), (20, 2.1)])
    with pytest.raises(ValueError):
        es.exponent_fit([(10, 1.0), (20, -2.0), (40, 3.0)])


def test_exponent_fit_interval_coverage(rng):
    hits = 0
    N = np.array([100, 200, 400, 800, 1600])
    for _ in range(100):
        y = 2.0 * N ** 0.4 * np.exp(0.05 * rng.standard_normal(N.size))
        fit = es.exponent_fit(list(zip(N, y)))
        hits += fit.slope_lo <= 0.4 <= fit.slope_hi
    assert hits >= 85


def test_tw_reference_interpolates_and_clamps():
    r = np.linspace(-5.0, 5.0, 401)
    F = es.tw_reference_from_table(pd.DataFrame({"r": r, "F2": stats.norm.cdf(r)}))
    x = np.array([-1.234, 0.0, 2.71])
    np.testing.assert_allclose(F(x), stats.norm.cdf(x), atol=1e-4)
    np.testing.assert_array_equal(F(np.array([-9.0, 9.0])), [0.0, 1.0])


def test_tw_reference_validates_table():
    with pytest.raises(ValueError):
        es.tw_reference_from_table(pd.DataFrame({"r": [0.0, 0.0, 1.0], "F2": [0.1, 0.2, 0.3]}))
    with pytest.raises(ValueError):
        es.tw_reference_from_table(pd.DataFrame({"r": [0.0, 1.0, 2.0], "F2": [0.1, 0.3, 0.2]}))


def test_load_tw_reference_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        es.load_tw_reference(str(tmp_path / "missing.csv"))
    bad = tmp_path / "bad.csv"
    pd.DataFrame({"r": [0.0, 1.0]}).to_csv(bad, index=False)
    with pytest.raises(ValueError):
        es.load_tw_reference(str(bad))


def test_summary_row_columns(rng):
    values = rng.standard_normal(60)
    row = es.summary_row(100, 3, values, stats.norm.cdf, B=100, seed=0)
    assert set(es.SUMMARY_COLUMNS) <= set(row)
    assert row["mean_lo"] <= row["mean"] <= row["mean_hi"]
    small = es.summary_row(100, 3, values[:5], stats.norm.cdf)
    assert math.isnan(small["sd_lo"]) and small["count"] == 5
