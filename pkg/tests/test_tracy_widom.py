import numpy as np
import pytest

from polymer_lab.fredholm import tracy_widom as tw
from polymer_lab.fredholm.special import airy


def test_airy_kernel_diagonal_is_limit_of_off_diagonal():
    x = 0.7
    near = tw.airy_kernel(x, x + 1e-4)
    assert near == pytest.approx(tw.airy_kernel(x, x), abs=1e-5)
    ai, aip = airy(x)
    assert tw.airy_kernel(x, x) == pytest.approx(aip ** 2 - x * ai ** 2)


def test_airy_kernel_is_symmetric():
    x, y = np.array([-1.0, 0.5, 2.0]), np.array([0.3, -2.0, 2.5])
    np.testing.assert_allclose(tw.airy_kernel(x, y), tw.airy_kernel(y, x), rtol=1e-12)


def test_tails():
    assert tw.tracy_widom_gue(-8.0) < 1e-4
    assert tw.tracy_widom_gue(6.0) > 1.0 - 1e-6


def test_monotone_on_a_grid():
    values = tw.tracy_widom_gue(np.linspace(-6.0, 4.0, 41))
    assert np.all(np.diff(values) >= -1e-9)
    assert np.all((values >= 0.0) & (values <= 1.0))


def test_vectorized_shape():
    grid = np.array([[-2.0, -1.0], [0.0, 1.0]])
    assert tw.tracy_widom_gue(grid).shape == (2, 2)


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        tw.tracy_widom_gue(float("nan"))


def test_table_layout():
    df = tw.tw_table(tw.default_grid(-3.0, 1.0, 0.5))
    assert list(df.columns) == ["r", "F2"]
    assert len(df) == 9
    assert df["r"].iloc[0] == -3.0 and df["r"].iloc[-1] == 1.0


def test_default_grid_size():
    grid = tw.default_grid()
    assert grid.size == 401
    assert grid[0] == -10.0 and grid[-1] == 6.0


@pytest.mark.slow
def test_moments():
    moments = tw.tw_moments()
    assert moments["mean"] == pytest.approx(-1.7710868, abs=1e-3)
    assert moments["sd"] == pytest.approx(0.9017773, abs=1e-3)
    assert moments["mean_delta"] < 1e-3
