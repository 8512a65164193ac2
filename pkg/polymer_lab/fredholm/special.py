"""
Special functions for the kernels: principal log-Gamma, digamma and its
first two derivatives on the complex plane, and the Airy function pair on
the real line.

All of them are vectorized over numpy arrays. log_gamma and polygamma shift
the argument to Re z >= 15 by the functional equation and finish with the
Stirling (resp. digamma) asymptotic series.
"""

import math

import numpy as np

from ..utils.errors import PoleError

SHIFT_TO = 15.0
EULER_GAMMA = 0.57721566490153286061

# B_2, B_4, ..., B_16
_BERNOULLI = np.array([
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _as_complex(z):
    z = np.asarray(z, dtype=complex)
    re = z.real
    if np.any((z.imag == 0) & (re <= 0) & (re == np.round(re))):
        raise PoleError("Gamma has a pole at non-positive integers", z=np.asarray(z).tolist())
    return z


def _shift(z):
    """Number of unit steps taking each Re z to at least SHIFT_TO."""
    return np.maximum(0, np.ceil(SHIFT_TO - z.real)).astype(int)


def log_gamma(z):
    """
    Principal branch of log Gamma, continuous on C minus (-inf, 0].

    log Gamma(z) = log Gamma(z + m) - sum_{k<m} log(z + k), with principal
    logs, agrees with the principal branch on the cut plane.
    """
    scalar = np.ndim(z) == 0
    z = _as_complex(z)
    m = _shift(z)
    acc = np.zeros_like(z)
    for k in range(int(m.max(initial=0))):
        active = k < m
        acc = acc - np.where(active, np.log(np.where(active, z + k, 1.0)), 0.0)
    w = z + m
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    power = inv
    for k, b in enumerate(_BERNOULLI, start=1):
        series = series + b / (2 * k * (2 * k - 1)) * power
        power = power * inv2
    out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series + acc
    return out[()] if scalar else out


def polygamma(k, z):
    """psi^{(k)}(z) for k = 0, 1, 2 (digamma, trigamma, tetragamma)."""
    if k not in (0, 1, 2):
        raise ValueError(f"polygamma order must be 0, 1 or 2, got {k}")
    scalar = np.ndim(z) == 0
    z = _as_complex(z)
    m = _shift(z)
    acc = np.zeros_like(z)
    for j in range(int(m.max(initial=0))):
        active = j < m
        x = np.where(active, z + j, 1.0)
        if k == 0:
            term = -1.0 / x
        elif k == 1:
            term = 1.0 / x ** 2
        else:
            term = -2.0 / x ** 3
        acc = acc + np.where(active, term, 0.0)
    w = z + m
    inv = 1.0 / w
    inv2 = inv * inv
    if k == 0:
        out = np.log(w) - 0.5 * inv
        power = inv2
        for n, b in enumerate(_BERNOULLI, start=1):
            out = out - b / (2 * n) * power
            power = power * inv2
    elif k == 1:
        out = inv + 0.5 * inv2
        power = inv2 * inv
        for b in _BERNOULLI:
            out = out + b * power
            power = power * inv2
    else:
        out = -inv2 - inv2 * inv
        power = inv2 * inv2
        for n, b in enumerate(_BERNOULLI, start=1):
            out = out - (2 * n + 1) * b * power
            power = power * inv2
    out = out + acc
    return out[()] if scalar else out


def digamma(z):
    return polygamma(0, z)


# --------------------------------------------------------------------------
# Airy functions

SERIES_LOW = -8.0
SERIES_HIGH = 6.0
_SERIES_TERMS = 70
_POS_TERMS = 19
_NEG_TERMS = 30


def _airy_origin():
    c1 = math.exp(-2.0 / 3.0 * math.log(3.0) - log_gamma(2.0 / 3.0).real)
    c2 = math.exp(-1.0 / 3.0 * math.log(3.0) - log_gamma(1.0 / 3.0).real)
    return c1, c2


AI0, NEG_AIP0 = _airy_origin()


def _u_coefficients(count):
    u = np.ones(count)
    for k in range(1, count):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    v = np.array([1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, count)])
    return u, v


_U, _V = _u_coefficients(2 * _NEG_TERMS + 2)


def _airy_series(x):
    # Maclaurin series summed in extended precision to limit cancellation
    x = x.astype(np.longdouble)
    x3 = x ** 3
    f = np.ones_like(x)
    g = x.copy()
    fp = x * x / 2
    gp = np.ones_like(x)
    tf, tg, tfp, tgp = f.copy(), g.copy(), fp.copy(), gp.copy()
    for k in range(1, _SERIES_TERMS):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        tgp = tgp * x3 / ((3 * k - 2) * (3 * k))
        f += tf
        g += tg
        gp += tgp
        if k >= 2:
            tfp = tfp * x3 / ((3 * k - 3) * (3 * k - 1))
            fp += tfp
    ai = AI0 * f - NEG_AIP0 * g
    aip = AI0 * fp - NEG_AIP0 * gp
    return ai.astype(float), aip.astype(float)


def _airy_positive(x):
    zeta = 2.0 / 3.0 * x ** 1.5
    sign = 1.0
    su = np.zeros_like(x)
    sv = np.zeros_like(x)
    power = np.ones_like(x)
    for k in range(_POS_TERMS):
        su += sign * _U[k] * power
        sv += sign * _V[k] * power
        power = power / zeta
        sign = -sign
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pref * su / x ** 0.25, -pref * sv * x ** 0.25


def _airy_negative(x):
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    r = np.zeros_like(z)
    s = np.zeros_like(z)
    for k in range(_NEG_TERMS // 2 + 1):
        sign = -1.0 if k % 2 else 1.0
        even = zeta ** (-2 * k)
        odd = zeta ** (-(2 * k + 1))
        p += sign * _U[2 * k] * even
        q += sign * _U[2 * k + 1] * odd
        r += sign * _V[2 * k] * even
        s += sign * _V[2 * k + 1] * odd
    theta = zeta - math.pi / 4.0
    c, sn = np.cos(theta), np.sin(theta)
    root = math.sqrt(math.pi)
    ai = (c * p + sn * q) / (root * z ** 0.25)
    aip = z ** 0.25 * (sn * r - c * s) / root
    return ai, aip


def airy(x):
    """(Ai(x), Ai'(x)) for real x, accurate to about 1e-10 absolute."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    mid = (x >= SERIES_LOW) & (x <= SERIES_HIGH)
    pos = x > SERIES_HIGH
    neg = x < SERIES_LOW
    if mid.any():
        ai[mid], aip[mid] = _airy_series(x[mid])
    if pos.any():
        ai[pos], aip[pos] = _airy_positive(x[pos])
    if neg.any():
        ai[neg], aip[neg] = _airy_negative(x[neg])
    if scalar:
        return float(ai[0]), float(aip[0])
    return ai, aip
