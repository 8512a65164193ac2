import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from polymer_lab import coupling
from polymer_lab import weights as wts
from polymer_lab.ensemble_stats import dkw_threshold, ks_distance
from polymer_lab.lattice import LatticeParams, log_partition
from polymer_lab.utils.common_utils import make_stream
from polymer_lab.utils.errors import ConfigError


def test_rademacher_pairs_are_fixed(rademacher):
    u, v = coupling.skorohod_pairs(rademacher, make_stream(0), 500)
    assert np.all(u == -1.0) and np.all(v == 1.0)


def test_two_point_law_pairs():
    a = 2.0
    spec = wts.standardize(wts.finite_discrete([-a, 1.0 / a], [1.0 / (1 + a * a), a * a / (1 + a * a)]))
    u, v = coupling.skorohod_pairs(spec, make_stream(1), 200)
    np.testing.assert_allclose(u, -a, rtol=1e-12)
    np.testing.assert_allclose(v, 1.0 / a, rtol=1e-12)


def test_atom_at_zero_gives_degenerate_pair():
    spec = wts.standardize(wts.finite_discrete([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25]))
    u, v = coupling.skorohod_pairs(spec, make_stream(2), 40_000)
    zero = (u == 0.0) & (v == 0.0)
    assert abs(zero.mean() - 0.5) < 5.0 * math.sqrt(0.25 / u.size)
    assert np.all(u[~zero] < 0) and np.all(v[~zero] > 0)


def test_pairs_need_standardized_spec():
    with pytest.raises(ConfigError):
        coupling.skorohod_pairs(wts.uniform(), make_stream(0), 10)


def test_embedding_pair_order():
    assert coupling.EmbeddingPair(-1.0, 0.5).v == 0.5
    with pytest.raises(ValueError):
        coupling.EmbeddingPair(0.5, 1.0)


def test_exit_values_of_degenerate_pair():
    out = coupling.exit_values(np.zeros(5), np.zeros(5), make_stream(3))
    np.testing.assert_array_equal(out, np.zeros(5))


def test_exit_law_recovers_gaussian(gaussian):
    """Exiting a sampled barrier pair reproduces the weight law."""
    stream = make_stream(4)
    u, v = coupling.skorohod_pairs(gaussian, stream, 20_000)
    x = coupling.exit_values(u, v, stream)
    assert ks_distance(x, stats.norm.cdf) < dkw_threshold(x.size, 1e-4)


def test_exit_law_recovers_exponential():
    spec = wts.from_name("shifted_exponential")
    stream = make_stream(5)
    u, v = coupling.skorohod_pairs(spec, stream, 20_000)
    x = coupling.exit_values(u, v, stream)
    assert ks_distance(x, wts.distribution(spec).cdf) < dkw_threshold(x.size, 1e-4)


def test_embedded_rademacher_walk(rademacher):
    paths = coupling.embed_walk(rademacher, 2, 50, make_stream(6), steps_per_unit=1000)
    inc = np.diff(paths.embedded_walk, axis=1)
    assert np.all(np.abs(np.abs(inc) - 1.0) <= 6.0 * math.sqrt(1e-3))
    assert paths.embedded_walk[:, 0].tolist() == [0.0, 0.0]
    assert np.all(np.diff(paths.stopping_indices, axis=1) > 0)
    assert paths.brownian.shape == (2, 51)
    assert np.all(paths.sup_distance >= 0)


def test_embedding_times_average_one(rademacher):
    N = 50
    totals = []
    for k in range(200):
        paths = coupling.embed_walk(rademacher, 1, N, make_stream(7, k), steps_per_unit=1000)
        totals.append(paths.stopping_indices[0, -1] / 1000.0)
    assert np.mean(totals) / N == pytest.approx(1.0, abs=0.1)


def test_embedding_keeps_fine_path_and_oy_grid(gaussian):
    paths = coupling.embed_walk(gaussian, 1, 10, make_stream(8), steps_per_unit=200, oy_per_unit=8,
                                keep_fine=True)
    assert paths.brownian_fine.shape == (1, 10 * 200 + 1)
    assert paths.oy_increments.shape == (1, 80)
    assert paths.oy_increments.sum() == pytest.approx(paths.brownian[0, -1])
    np.testing.assert_allclose(paths.rescaled_brownian(1.0), paths.brownian[:, -1])
    np.testing.assert_allclose(paths.rescaled_walk(0.0), [0.0])


@pytest.mark.slow
def test_embedded_gaussian_walk_has_gaussian_steps_and_endpoint(gaussian):
    """Stopped Brownian increments are N(0,1); S_N / sqrt(N) is N(0,1) across rows."""
    q, N = 400, 25
    paths = coupling.embed_walk(gaussian, 400, N, make_stream(12), steps_per_unit=q)
    # exits are detected on the fine grid, so each step overshoots by O(q^-1/2)
    overshoot = 1.0 / math.sqrt(q)
    steps = paths.walk_increments().ravel()
    assert ks_distance(steps, stats.norm.cdf) < dkw_threshold(steps.size, 1e-4) + overshoot
    endpoint = paths.rescaled_walk(1.0) / math.sqrt(N)
    np.testing.assert_allclose(endpoint, paths.embedded_walk[:, -1] / math.sqrt(N))
    assert ks_distance(endpoint, stats.norm.cdf) < dkw_threshold(endpoint.size, 1e-4) + overshoot
    assert endpoint.var() == pytest.approx(1.0, abs=0.3)


def test_oy_grid_must_divide_fine_grid(gaussian):
    with pytest.raises(ConfigError):
        coupling.embed_walk(gaussian, 1, 5, make_stream(0), steps_per_unit=100, oy_per_unit=8)


def test_functional_of_zero_counts_paths():
    N, n = 10, 3
    value = coupling.functional_F_N(np.zeros((n, N + 1)), N, beta=1.0)
    assert value == pytest.approx(math.log(math.comb(N + n - 2, n - 1)))


def test_functional_single_row():
    f = np.linspace(0.0, 2.0, 21)[None, :] ** 2
    assert coupling.functional_F_N(f, 20, beta=0.7) == pytest.approx(0.7 * (f[0, -1] - f[0, 0]))


def test_functional_on_walk_is_lattice_free_energy(gaussian):
    paths = coupling.embed_walk(gaussian, 3, 20, make_stream(9), steps_per_unit=100)
    direct = log_partition(LatticeParams(N=20, n=3, beta=1.1), paths.walk_increments())
    assert coupling.functional_F_N(paths.embedded_walk, 20, 1.1) == pytest.approx(direct, rel=1e-13)


def test_path_metric():
    f = np.array([[0.0, 1.0, 2.0], [0.0, 0.0, 0.0]])
    g = np.array([[0.0, 1.5, 2.0], [0.0, -1.0, 0.0]])
    assert coupling.path_metric(f, g) == pytest.approx(1.5)
    assert coupling.path_metric(f, f) == 0.0
    assert coupling.path_metric(f, g) == coupling.path_metric(g, f)


def test_lipschitz_bound_on_random_pairs():
    rng = np.random.default_rng(10)
    N, n = 15, 4
    for _ in range(200):
        f = np.cumsum(rng.standard_normal((n, N + 1)), axis=1)
        g = f + 0.3 * rng.standard_normal((n, N + 1))
        lhs, rhs, ok = coupling.lipschitz_check(f, g, N, beta=rng.uniform(0.1, 3.0))
        assert ok, (lhs, rhs)


def test_lipschitz_bound_is_tight_for_constant_shift_of_increments():
    N, n = 8, 2
    f = np.zeros((n, N + 1))
    g = f + 1.0
    lhs, rhs, ok = coupling.lipschitz_check(f, g, N, beta=1.0)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(4.0)
    assert ok


def test_simplex_cell_volume():
    assert coupling.simplex_cell_volume([1, 1, 1]) == pytest.approx(1.0 / 6.0)
    assert coupling.simplex_cell_volume([1, 2, 3]) == 1.0
    assert coupling.simplex_cell_volume([2, 2, 5, 5, 5]) == pytest.approx(1.0 / 12.0)
    with pytest.raises(ValueError):
        coupling.simplex_cell_volume([3, 1])


def test_envelope_is_positive():
    assert coupling.gap_envelope(4, 1000, 1.0) > 0
    assert coupling.gap_envelope(1, 1, 1.0) == 0.0


def test_coupling_gap_experiment_shapes(rademacher):
    summary, samples = coupling.coupling_gap_experiment(
        rademacher, 0.2, [20, 40], 1.0, count=3, seed=0, steps_per_unit=200)
    assert list(summary["N"]) == [20, 40]
    for col in coupling.GAP_COLUMNS:
        assert col in summary.columns
    assert len(samples) == 6
    assert (samples["gap1"] >= 0).all() and (samples["gap2"] >= 0).all()


def test_coupling_gap_streams_depend_on_family_key(rademacher):
    _, plain = coupling.coupling_gap_experiment(rademacher, 0.2, [20], 1.0, count=2, seed=0, steps_per_unit=200)
    _, keyed = coupling.coupling_gap_experiment(rademacher, 0.2, [20], 1.0, count=2, seed=0, steps_per_unit=200,
                                                key=(1,))
    assert not np.allclose(plain["sup_distance"], keyed["sup_distance"])


def test_sup_distance_growth_table(rademacher):
    table, fit = coupling.sup_distance_growth(rademacher, [10, 20, 40], count=4, seed=1, steps_per_unit=200)
    assert list(table["N"]) == [10, 20, 40]
    assert (table["mean_sup"] > 0).all()
    assert fit is not None and fit.points == 3


def test_modulus_far_tail_and_sure_event():
    far = coupling.modulus_check(1.0, 0.01, 10.0, 200, make_stream(11))
    assert far.probability == 0.0
    sure = coupling.modulus_check(1.0, 0.9, 0.1, 200, make_stream(12))
    assert sure.probability > 0.95


def test_modulus_check_validation():
    with pytest.raises(ConfigError):
        coupling.modulus_check(1.0, 1.5, 0.1, 10, make_stream(0))


def test_fit_modulus_constants_bounds_every_row():
    table = pd.DataFrame({"r": [0.1, 0.1, 0.3], "x": [0.2, 0.5, 0.5], "probability": [0.9, 0.2, 0.6]})
    k1 = coupling.fit_modulus_constants(table)
    bound = k1 / table["r"] * np.exp(-0.5 * table["x"] ** 2 / table["r"])
    assert (table["probability"] <= bound + 1e-12).all()
    assert np.isclose(bound, table["probability"]).any()
