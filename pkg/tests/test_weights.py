import math

import numpy as np
import pytest

from polymer_lab import weights as wts
from polymer_lab.utils.common_utils import make_stream
from polymer_lab.utils.errors import ConfigError, DegenerateDistributionError


def test_standardize_uniform():
    spec = wts.standardize(wts.uniform(0.0, 1.0))
    assert spec.location == pytest.approx(0.5)
    assert spec.scale == pytest.approx(1.0 / math.sqrt(12.0))
    assert wts.is_standardized(spec)


def test_standardize_rademacher_is_identity():
    spec = wts.standardize(wts.rademacher())
    assert spec.location == 0.0
    assert spec.scale == 1.0


def test_standardize_is_idempotent(named_spec):
    assert wts.standardize(named_spec) == named_spec


@pytest.mark.parametrize(
    "spec, fourth",
    [
        (wts.gaussian(), 3.0),
        (wts.rademacher(), 1.0),
        (wts.uniform(), 9.0 / 5.0),
        (wts.shifted_exponential(), 9.0),
    ],
)
def test_exact_fourth_moment(spec, fourth):
    spec = wts.standardize(spec)
    assert wts.exact_moments(spec, 0) == 1.0
    assert wts.exact_moments(spec, 1) == 0.0
    assert wts.exact_moments(spec, 2) == pytest.approx(1.0)
    assert wts.exact_moments(spec, 4) == pytest.approx(fourth, rel=1e-12)


def test_exponential_third_moment():
    assert wts.exact_moments(wts.standardize(wts.shifted_exponential(3.0)), 3) == pytest.approx(2.0)


def test_exact_moments_rejects_high_order():
    with pytest.raises(ValueError):
        wts.exact_moments(wts.from_name("gaussian"), 5)


def test_student_t_fourth_moment_is_infinite():
    spec = wts.standardize(wts.student_t(4.0))
    assert wts.exact_moments(spec, 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        wts.exact_moments(spec, 4)


def test_point_mass_is_degenerate():
    with pytest.raises(DegenerateDistributionError):
        wts.standardize(wts.finite_discrete([1.5], [1.0]))


def test_finite_discrete_needs_probabilities_summing_to_one():
    with pytest.raises(ConfigError):
        wts.finite_discrete([0.0, 1.0], [0.3, 0.3])


def test_unknown_family():
    with pytest.raises(ConfigError):
        wts.make_spec("cauchy")
    with pytest.raises(ConfigError):
        wts.from_json("student_t")


def test_sample_empty(gaussian):
    out = wts.sample(gaussian, make_stream(0), 0)
    assert out.shape == (0,)


def test_rademacher_support(rademacher):
    out = wts.sample(rademacher, make_stream(1), 10_000)
    assert set(np.unique(out)) == {-1.0, 1.0}


def test_sample_moments(named_spec):
    """Mean and variance within five standard errors."""
    m = 1_000_000
    x = wts.sample(named_spec, make_stream(7, 1), m)
    fourth = wts.exact_moments(named_spec, 4)
    assert abs(x.mean()) < 5.0 / math.sqrt(m)
    assert abs(x.var() - 1.0) < 5.0 * math.sqrt((fourth - 1.0) / m)


def test_chunked_draws_match_single_draw(named_spec):
    whole = wts.sample(named_spec, make_stream(3, 9), 300)
    stream = make_stream(3, 9)
    parts = np.concatenate([wts.sample(named_spec, stream, k) for k in (1, 99, 200)])
    np.testing.assert_array_equal(whole, parts)


def test_streams_are_reproducible_and_keyed(gaussian):
    a = wts.sample(gaussian, make_stream(11, 0), 50)
    b = wts.sample(gaussian, make_stream(11, 0), 50)
    c = wts.sample(gaussian, make_stream(11, 1), 50)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_finite_discrete_sampling_frequencies():
    spec = wts.standardize(wts.finite_discrete([-1.0, 0.0, 2.0], [0.5, 0.25, 0.25]))
    x = wts.sample(spec, make_stream(5), 200_000)
    values, probs = wts.discrete_atoms(spec)
    for v, p in zip(values, probs):
        freq = np.mean(np.isclose(x, v))
        assert abs(freq - p) < 5.0 * math.sqrt(p * (1 - p) / x.size)


def test_cdf_of_atomic_law():
    spec = wts.from_name("rademacher")
    np.testing.assert_allclose(wts.cdf(spec, [-2.0, -1.0, 0.0, 1.0]), [0.0, 0.5, 0.5, 1.0])


def test_json_round_trip():
    spec = wts.standardize(wts.finite_discrete([-2.0, 0.5], [0.2, 0.8]))
    assert wts.from_json(wts.to_json(spec)) == spec


def test_json_object_without_map_is_standardized():
    spec = wts.from_json({"family": "uniform", "params": {"low": -1.0, "high": 3.0}})
    assert wts.is_standardized(spec)
