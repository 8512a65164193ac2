import math

import numpy as np
import pytest
from scipy import special as sp

from polymer_lab.fredholm import special
from polymer_lab.utils.errors import PoleError


def test_log_gamma_known_values():
    assert abs(special.log_gamma(1.0)) < 1e-13
    assert abs(special.log_gamma(2.0)) < 1e-13
    assert special.log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-13)
    assert special.log_gamma(10.0).real == pytest.approx(math.log(362880.0), rel=1e-13)


def test_log_gamma_principal_branch(rng):
    z = rng.uniform(-30, 30, 200) + 1j * rng.uniform(-30, 30, 200)
    np.testing.assert_allclose(special.log_gamma(z), sp.loggamma(z), rtol=1e-12, atol=1e-12)


def test_log_gamma_recurrence():
    z = np.array([0.3 + 0.2j, -2.5 + 1.0j, 4.0 - 7.0j])
    lhs = np.exp(special.log_gamma(z + 1) - special.log_gamma(z))
    np.testing.assert_allclose(lhs, z, rtol=1e-12)


def test_poles_raise():
    for z in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            special.log_gamma(z)
        with pytest.raises(PoleError):
            special.digamma(z)


def test_digamma():
    assert special.digamma(1.0).real == pytest.approx(-np.euler_gamma, abs=1e-13)
    z = np.array([0.7 + 3.0j, -3.3 + 0.5j, 12.0 + 0.0j])
    np.testing.assert_allclose(special.digamma(z), sp.psi(z), rtol=1e-12)
    assert abs(special.digamma(1e-3) + 1e3) < 1.0


def test_trigamma_and_tetragamma():
    x = np.array([0.25, 1.0, 3.5, 20.0])
    np.testing.assert_allclose(special.polygamma(1, x).real, sp.polygamma(1, x), rtol=1e-12)
    np.testing.assert_allclose(special.polygamma(2, x).real, sp.polygamma(2, x), rtol=1e-12)
    z = 0.4 - 2.0j
    assert special.polygamma(1, z) - special.polygamma(1, z + 1) == pytest.approx(1.0 / z ** 2, rel=1e-12)


def test_polygamma_order():
    with pytest.raises(ValueError):
        special.polygamma(3, 1.0)


def test_airy_at_origin():
    ai, aip = special.airy(0.0)
    assert ai == pytest.approx(1.0 / (3 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0)), rel=1e-14)
    assert aip == pytest.approx(-1.0 / (3 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0)), rel=1e-14)


def test_airy_against_scipy():
    x = np.linspace(-20.0, 20.0, 801)
    ai, aip = special.airy(x)
    ref_ai, ref_aip, _, _ = sp.airy(x)
    np.testing.assert_allclose(ai, ref_ai, rtol=0, atol=1e-9)
    np.testing.assert_allclose(aip, ref_aip, rtol=0, atol=1e-9)


def test_airy_across_switch_points():
    for x0 in (special.SERIES_LOW, special.SERIES_HIGH):
        x = np.array([x0 - 1e-9, x0 + 1e-9])
        ai, aip = special.airy(x)
        assert abs(ai[1] - ai[0]) < 1e-9
        assert abs(aip[1] - aip[0]) < 1e-8
