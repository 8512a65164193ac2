import math

import numpy as np
import pytest

from polymer_lab import lattice
from polymer_lab import weights as wts
from polymer_lab.lattice import LatticeParams
from polymer_lab.utils.common_utils import make_stream
from polymer_lab.utils.errors import (
    ConfigError,
    NonFiniteWeightError,
    ResourceLimitError,
    ShapeMismatchError,
)


def test_zero_disorder_counts_paths():
    params = LatticeParams(N=3, n=2, beta=1.0)
    assert lattice.log_partition(params, np.zeros((3, 2))) == pytest.approx(math.log(3.0))


def test_two_by_two_closed_form():
    a, b, c, d = 0.3, -1.2, 0.7, 2.0
    W = np.array([[a, b], [c, d]])
    for beta in (0.5, 1.0, 3.0):
        params = LatticeParams(N=2, n=2, beta=beta)
        expected = math.log(math.exp(beta * (a + c + d)) + math.exp(beta * (a + b + d)))
        assert lattice.log_partition(params, W) == pytest.approx(expected, rel=1e-14)
    assert lattice.last_passage(LatticeParams(N=2, n=2, beta=1.0), W) == pytest.approx(a + d + max(b, c))


def test_single_row_and_single_column():
    rng = np.random.default_rng(0)
    W = rng.standard_normal((7, 1))
    assert lattice.log_partition(LatticeParams(N=7, n=1, beta=2.0), W) == pytest.approx(2.0 * W.sum())
    W = rng.standard_normal((1, 5))
    assert lattice.log_partition(LatticeParams(N=1, n=5, beta=0.5), W) == pytest.approx(0.5 * W.sum())


def test_sweep_matches_path_enumeration():
    rng = np.random.default_rng(1)
    for N in range(1, 12):
        for n in range(1, 13 - N):
            for _ in range(50):
                W = rng.standard_normal((N, n))
                for beta in (0.5, 1.0, 2.0):
                    params = LatticeParams(N=N, n=n, beta=beta)
                    exact = lattice.enumerate_log_partition(params, W)
                    assert lattice.log_partition(params, W) == pytest.approx(exact, rel=1e-10, abs=1e-12)
                lpp = lattice.last_passage(LatticeParams(N=N, n=n, beta=1.0), W)
                assert lpp == pytest.approx(lattice.enumerate_last_passage(params, W), rel=1e-12, abs=1e-12)


def test_sandwich_between_last_passage_and_path_count():
    rng = np.random.default_rng(2)
    N, n, beta = 40, 6, 1.5
    params = LatticeParams(N=N, n=n, beta=beta)
    for _ in range(20):
        W = rng.standard_normal((N, n))
        L = lattice.last_passage(params, W)
        log_z = lattice.log_partition(params, W)
        assert beta * L <= log_z + 1e-12
        assert log_z <= beta * L + lattice.log_path_count(N, n) + 1e-12


def test_constant_shift_adds_path_length():
    rng = np.random.default_rng(3)
    N, n, beta, c = 12, 4, 0.8, 0.37
    params = LatticeParams(N=N, n=n, beta=beta)
    W = rng.standard_normal((N, n))
    shifted = lattice.log_partition(params, W + c)
    assert shifted - lattice.log_partition(params, W) == pytest.approx(beta * c * (N + n - 1), rel=1e-12)


def test_weight_scaling_is_a_change_of_beta():
    rng = np.random.default_rng(4)
    W = rng.standard_normal((9, 3))
    lhs = lattice.log_partition(LatticeParams(N=9, n=3, beta=1.0), 2.5 * W)
    rhs = lattice.log_partition(LatticeParams(N=9, n=3, beta=2.5), W)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_monotone_in_each_weight():
    rng = np.random.default_rng(5)
    params = LatticeParams(N=6, n=3, beta=1.0)
    W = rng.standard_normal((6, 3))
    base = lattice.log_partition(params, W)
    W[2, 1] += 0.5
    assert lattice.log_partition(params, W) > base


def test_disorder_validation():
    params = LatticeParams(N=3, n=2, beta=1.0)
    with pytest.raises(ShapeMismatchError):
        lattice.log_partition(params, np.zeros((2, 3)))
    bad = np.zeros((3, 2))
    bad[1, 1] = np.nan
    with pytest.raises(NonFiniteWeightError):
        lattice.log_partition(params, bad)


def test_params_validation():
    with pytest.raises(ConfigError):
        LatticeParams(N=0, n=1, beta=1.0)
    with pytest.raises(ConfigError):
        LatticeParams(N=3, n=2, beta=0.0)
    with pytest.raises(ConfigError):
        LatticeParams(N=3, n=2, beta=1.0, alpha=1.0)


def test_enumeration_has_a_budget():
    params = LatticeParams(N=40, n=20, beta=1.0)
    with pytest.raises(ResourceLimitError):
        lattice.enumerate_log_partition(params, np.zeros((40, 20)))


def test_rows_for():
    assert lattice.rows_for(8000, 1.0 / 3.0) == 20
    assert lattice.rows_for(10 ** 6, 0.2) == 15
    assert lattice.rows_for(1, 0.5) == 1


def test_path_counts():
    assert lattice.path_count(3, 2) == 3
    assert lattice.path_count(5, 4) == math.comb(7, 3)
    assert lattice.log_path_count(50, 10) == pytest.approx(math.log(math.comb(58, 9)))


def test_normalize_free_energy_examples():
    N, alpha, beta = 10_000, 0.2, 1.0
    params = LatticeParams(N=N, n=lattice.rows_for(N, alpha), beta=beta, alpha=alpha)
    centre = 2.0 * beta * N ** 0.6
    assert lattice.normalize_free_energy(centre, params) == pytest.approx(0.0, abs=1e-12)
    assert lattice.normalize_free_energy(centre + N ** (0.5 - alpha / 6.0), params) == pytest.approx(1.0)
    assert lattice.lln_ratio(centre, params) == pytest.approx(1.0)


def test_log_beta_shift():
    params = LatticeParams(N=1000, n=4, beta=2.0, alpha=0.2)
    plain = lattice.normalize_free_energy(50.0, params)
    shifted = lattice.normalize_free_energy(50.0, params, include_log_beta_shift=True)
    scale = 2.0 * 1000 ** (0.5 - 0.2 / 6.0)
    assert plain - shifted == pytest.approx(2.0 * 3 * math.log(2.0) / scale)


def test_normalization_needs_alpha():
    with pytest.raises(ConfigError):
        lattice.normalize_free_energy(1.0, LatticeParams(N=10, n=2, beta=1.0))


def test_normalize_last_passage_centre():
    assert lattice.normalize_last_passage(2.0 * math.sqrt(400 * 9), 400, 9) == pytest.approx(0.0)


def test_streaming_matches_materialized(gaussian):
    params = LatticeParams(N=300, n=7, beta=1.3)
    W = lattice.sample_disorder(params, gaussian, make_stream(9, 0))
    log_z, lpp = lattice.stream_sample(params, gaussian, make_stream(9, 0), with_last_passage=True)
    assert log_z == pytest.approx(lattice.log_partition(params, W), rel=1e-13)
    assert lpp == pytest.approx(lattice.last_passage(params, W), rel=1e-13)


def test_streaming_across_chunks(rademacher, monkeypatch):
    monkeypatch.setattr(lattice, "CHUNK_VALUES", 16)
    params = LatticeParams(N=50, n=5, beta=0.7)
    W = lattice.sample_disorder(params, rademacher, make_stream(2, 3))
    log_z, _ = lattice.stream_sample(params, rademacher, make_stream(2, 3))
    assert log_z == pytest.approx(lattice.log_partition(params, W), rel=1e-13)


def test_ensemble_of_one_equals_direct_call(gaussian):
    params = LatticeParams.from_alpha(200, 0.3, 1.0)
    (sample,) = lattice.ensemble(params, gaussian, 1, seed=42)
    W = lattice.sample_disorder(params, gaussian, lattice.sample_stream(42, params, 0))
    assert sample.index == 0
    assert sample.log_z == pytest.approx(lattice.log_partition(params, W), rel=1e-13)
    assert sample.normalized == pytest.approx(lattice.normalize_free_energy(sample.log_z, params))


def test_streams_differ_across_shapes_and_families(gaussian):
    short, long = LatticeParams(N=200, n=4, beta=1.0), LatticeParams(N=400, n=4, beta=1.0)
    first_short = lattice.sample_disorder(short, gaussian, lattice.sample_stream(7, short, 0))
    first_long = lattice.sample_disorder(long, gaussian, lattice.sample_stream(7, long, 0))
    assert not np.allclose(first_short[:200], first_long[:200])
    other_family = lattice.sample_disorder(short, gaussian, lattice.sample_stream(7, short, 0, key=(1,)))
    assert not np.allclose(first_short, other_family)
    (a,) = lattice.ensemble(short, gaussian, 1, seed=7)
    (b,) = lattice.ensemble(short, gaussian, 1, seed=7, key=(1,))
    assert a.log_z != b.log_z


def test_beta_shares_disorder_on_one_shape(gaussian):
    cold, hot = LatticeParams(N=60, n=3, beta=0.5), LatticeParams(N=60, n=3, beta=2.0)
    W = lattice.sample_disorder(cold, gaussian, lattice.sample_stream(3, cold, 0))
    (sample,) = lattice.ensemble(hot, gaussian, 1, seed=3)
    assert sample.log_z == pytest.approx(lattice.log_partition(hot, W), rel=1e-13)


def test_ensemble_independent_of_workers(gaussian):
    params = LatticeParams.from_alpha(100, 0.3, 1.0)
    one = lattice.ensemble(params, gaussian, 12, seed=5, workers=1)
    two = lattice.ensemble(params, gaussian, 12, seed=5, workers=2)
    assert [s.index for s in two] == list(range(12))
    assert [s.log_z for s in one] == [s.log_z for s in two]


def test_samples_frame_layout(rademacher):
    params = LatticeParams.from_alpha(50, 0.3, 1.0)
    df = lattice.samples_frame(lattice.ensemble(params, rademacher, 3, seed=0, with_last_passage=True))
    assert list(df.columns[: len(lattice.SAMPLE_COLUMNS)]) == lattice.SAMPLE_COLUMNS
    assert "last_passage" in df.columns
    assert (df["family"] == "rademacher").all()


def test_ensemble_count_must_be_positive(gaussian):
    with pytest.raises(ConfigError):
        lattice.ensemble(LatticeParams(N=5, n=2, beta=1.0), gaussian, 0, seed=0)


def test_free_energy_grows_like_law_of_large_numbers():
    spec = wts.from_name("gaussian")
    params = LatticeParams.from_alpha(4000, 0.2, 1.0)
    samples = lattice.ensemble(params, spec, 5, seed=1)
    ratios = [lattice.lln_ratio(s.log_z, params) for s in samples]
    assert 0.7 < np.median(ratios) < 1.3
