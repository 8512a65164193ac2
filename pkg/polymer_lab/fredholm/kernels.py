"""
Fredholm determinants of the semi-discrete polymer's Laplace transform.

E[exp(-u Z^n_tau(1))] = det(I + K_u) on a small circle C_0 around 0, where

    K_u(v, v') = 1/(2 pi i) int_{delta + iR} ds  pi / sin(-pi s)
                 * Gamma(v)^n / Gamma(s + v)^n * u^s e^{v tau s + tau s^2 / 2}
                 / (v + s - v').

Operators on a contour act with the measure dz / (2 pi i), which is the
``measure_factor`` default of ``fredholm_det``. The inner s-integral is a
composite Gauss-Legendre rule on a truncated vertical line, with narrow
panels where the poles of 1/(v + s - v') and of the sine come closest.

The same machinery evaluates the kernel after the change of variables
v = t^{-kappa} v~ (``kernel_rescaled``) and the cubic crossover kernel whose
determinant is F_GUE(r / beta) (``kernel_limit``).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from ..utils.errors import ConfigError, ContourError, ConvergenceError, PoleError
from . import contours
from .special import log_gamma, polygamma

TWO_PI_I = 2j * math.pi
DECAY = 37.0  # e^-37 ~ 1e-16
DEFAULT_TOL = 1e-8
MAX_NODES = 512
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class FredholmResult:
    value: complex
    nodes: int
    last_delta: float
    truncation: float = None
    extra: dict = field(default_factory=dict)

    @property
    def real(self):
        return float(self.value.real)

    def to_dict(self):
        out = {
            "value": [self.value.real, self.value.imag],
            "nodes": self.nodes,
            "truncation": self.truncation,
            "last_delta": self.last_delta,
        }
        out.update(self.extra)
        return out


def det_identity_plus(matrix):
    """det(I + M) by pivoted LU."""
    m = np.eye(matrix.shape[0], dtype=matrix.dtype) + matrix
    lu, piv = lu_factor(m, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(piv.shape[0])))
    det = np.prod(np.diag(lu))
    return -det if swaps % 2 else det


def fredholm_det(contour, kernel, tol=DEFAULT_TOL, max_nodes=MAX_NODES, measure_factor=1.0 / TWO_PI_I):
    """
    Nystrom determinant det(I + K) on ``contour``, doubling the resolution
    until two successive values differ by less than ``tol``.

    ``kernel(x, y)`` is called with a column of nodes and a row of nodes and
    must return the matrix K(x_i, y_j).
    """

    def evaluate(c):
        k = kernel(c.nodes[:, None], c.nodes[None, :])
        if not np.all(np.isfinite(k)):
            raise ConvergenceError("kernel matrix has non-finite entries", nodes=c.size)
        return complex(det_identity_plus(k * (c.weights * measure_factor)[None, :]))

    prev = evaluate(contour)
    history = [prev]
    while True:
        refined = contour.refined()
        if refined.size > max_nodes:
            raise ConvergenceError(
                "Fredholm determinant did not converge",
                nodes=contour.size,
                last_values=[[z.real, z.imag] for z in history[-2:]],
                tol=tol,
            )
        cur = evaluate(refined)
        history.append(cur)
        delta = abs(cur - prev)
        if delta < tol:
            return FredholmResult(value=cur, nodes=refined.size, last_delta=delta)
        contour, prev = refined, cur


def _log_sin(z):
    """log sin(z) without overflow for large |Im z| (branch is irrelevant)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    upper = z.imag >= 0
    zu, zl = z[upper], z[~upper]
    out[upper] = -1j * zu + np.log(0.5j) + np.log1p(-np.exp(2j * zu))
    out[~upper] = 1j * zl + np.log(-0.5j) + np.log1p(-np.exp(-2j * zl))
    return out


def _check_line_poles(points):
    dist = np.abs(points - np.round(points.real))
    if np.any(dist < 1e-12):
        raise PoleError("s-node sits on a pole of the sine", closest=float(dist.min()))


@dataclass(frozen=True)
class LineRule:
    """Nodes y_k and real weights of the truncated line integral."""

    y: np.ndarray
    w: np.ndarray
    half_height: float
    fine_width: float
    coarse_width: float

    @property
    def size(self):
        return self.y.shape[0]


def _build_line(log_integrand, probe, T0, gap, fine_extent, omega_of, gauss_coef, max_panel,
                resolution=contours.PANEL_NODES):
    """
    Grow T from T0 until the integrand at +-T is e^-37 below its peak on
    [-T, T] for every probe node, then lay out graded panels.
    """
    T = T0
    for _ in range(120):
        ys = np.linspace(-T, T, 513)
        mag = log_integrand(probe[:, None], ys[None, :]).real
        peak = float(np.max(mag))
        edge = float(max(np.max(mag[:, 0]), np.max(mag[:, -1])))
        if edge < peak - DECAY:
            break
        T *= 1.25
    else:
        raise ConvergenceError("line truncation did not settle", half_height=T)
    omega = omega_of(T)
    coarse = min(max_panel, 6.0 / omega, 1.5 / math.sqrt(gauss_coef))
    fine = min(gap, coarse)
    line = contours.graded_line(0.0, T, fine, fine_extent, coarse, resolution)
    return LineRule(y=line.nodes.imag, w=line.weights.imag, half_height=T, fine_width=fine,
                    coarse_width=coarse)


def _outer(v, vp):
    return np.ndim(v) == 2 and np.shape(v)[1] == 1 and np.ndim(vp) == 2 and np.shape(vp)[0] == 1


def _line_kernel(v, vp, log_integrand, line, offset):
    """
    (1/2 pi i) sum_k exp(L(v, y_k)) i w_k / (v + offset + i y_k - v').

    ``offset`` is delta for K_u and delta~ for the rescaled kernel; the line
    point itself is ``v + offset + i y``.
    """
    v = np.asarray(v, dtype=complex)
    vp = np.asarray(vp, dtype=complex)
    weights = 1j * line.w / TWO_PI_I
    if _outer(v, vp):
        rows, cols = v[:, 0], vp[0, :]
        amp = np.exp(log_integrand(rows[:, None], line.y[None, :])) * weights[None, :]
        out = np.empty((rows.shape[0], cols.shape[0]), dtype=complex)
        for i, vi in enumerate(rows):
            denom = vi + offset + 1j * line.y[:, None] - cols[None, :]
            out[i] = amp[i] @ (1.0 / denom)
        return out
    v, vp = np.broadcast_arrays(v, vp)
    flat_v, flat_vp = v.ravel(), vp.ravel()
    amp = np.exp(log_integrand(flat_v[:, None], line.y[None, :])) * weights[None, :]
    denom = flat_v[:, None] + offset + 1j * line.y[None, :] - flat_vp[:, None]
    return np.sum(amp / denom, axis=1).reshape(v.shape)


# --------------------------------------------------------------------------
# K_u


@dataclass(frozen=True)
class KernelParams:
    """
    Parameters of K_u and of its rescaled form. ``log_u`` is stored instead
    of u so that e^{-2 beta t^{1-kappa}} never underflows.
    """

    n: int
    tau: float
    log_u: float
    delta: float = 0.5
    r: float = 0.0
    beta: float = 1.0
    t: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be an integer >= 1", field="n", value=self.n)
        if not self.tau > 0:
            raise ConfigError("tau must be > 0", field="tau", value=self.tau)
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)", field="delta", value=self.delta)
        if not math.isfinite(self.log_u):
            raise ConfigError("log u must be finite", field="log_u", value=self.log_u)

    @classmethod
    def from_u(cls, n, tau, u, **kwargs):
        if not u > 0:
            raise ConfigError("u must be > 0", field="u", value=u)
        return cls(n=n, tau=tau, log_u=math.log(u), **kwargs)

    @property
    def u(self):
        return math.exp(self.log_u)


def _ku_log_integrand(p):
    def log_integrand(v, y):
        s = p.delta + 1j * y
        return (
            math.log(math.pi)
            - _log_sin(-math.pi * s)
            + p.n * (log_gamma(v) - log_gamma(s + v))
            + s * p.log_u
            + p.tau * (v * s + s * s / 2.0)
        )

    return log_integrand


def ku_line(p, radius):
    """s-line rule for K_u with v on the circle |v| = radius."""
    gap = min(p.delta - 2.0 * radius, 1.0 - p.delta)
    if gap <= 0:
        raise ContourError(
            "C_0 too large for the s-line: need 2 * radius < delta",
            radius=radius,
            delta=p.delta,
        )
    probe = radius * np.exp(2j * math.pi * np.arange(32) / 32)
    T0 = math.sqrt(2.0 * DECAY / p.tau + p.delta ** 2)

    def omega_of(T):
        return abs(p.log_u) + p.tau * (p.delta + radius) + p.n * math.log(2.0 + T + p.delta + radius) + math.pi

    line = _build_line(_ku_log_integrand(p), probe, T0, gap, 2.0 * radius + gap, omega_of,
                       p.tau / 2.0, 0.5)
    _check_line_poles(p.delta + 1j * line.y)
    return line


def kernel_Ku(v, vp, p, line=None):
    """K_u(v, v'); with a column ``v`` and a row ``vp`` the full matrix."""
    v = np.asarray(v, dtype=complex)
    vp = np.asarray(vp, dtype=complex)
    if np.any(np.real(v - vp) + p.delta <= 0):
        raise ContourError("Re(v + s - v') <= 0 on the s-line", delta=p.delta)
    if line is None:
        radius = float(max(np.max(np.abs(v)), np.max(np.abs(vp))))
        line = ku_line(p, radius)
    return _line_kernel(v, vp, _ku_log_integrand(p), line, p.delta)


def default_radius(delta):
    return 0.45 * delta


def laplace_oy(n, tau, u=None, log_u=None, delta=0.5, radius=None, resolution=16,
               tol=DEFAULT_TOL, max_nodes=MAX_NODES):
    """
    E[exp(-u Z^n_tau(1))] as det(I + K_u) on the circle of ``radius``
    (default 0.45 delta) around 0.
    """
    if (u is None) == (log_u is None):
        raise ConfigError("give exactly one of u and log_u")
    p = KernelParams.from_u(n, tau, u, delta=delta) if log_u is None else KernelParams(n, tau, log_u, delta)
    radius = default_radius(delta) if radius is None else radius
    line = ku_line(p, radius)
    contour = contours.circle(0.0, radius, resolution)
    result = fredholm_det(contour, lambda x, y: kernel_Ku(x, y, p, line), tol=tol, max_nodes=max_nodes)
    if abs(result.value.imag) > IMAG_TOL:
        raise ConvergenceError("Laplace transform has an imaginary residue",
                               imag=result.value.imag, value=result.value.real)
    return FredholmResult(value=result.value, nodes=result.nodes, last_delta=result.last_delta,
                          truncation=line.half_height,
                          extra={"s_nodes": line.size, "radius": radius, "delta": delta})


def laplace_oracle_single(tau, u, nodes=200):
    """E[exp(-u e^{B(tau)})] by Gauss-Hermite quadrature (the n = 1 case)."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    return float(np.sum(w * np.exp(-u * np.exp(math.sqrt(tau) * x))) / math.sqrt(2.0 * math.pi))


# --------------------------------------------------------------------------
# scaling quantities


def exponents(alpha):
    return (1.0 - alpha) / 2.0, (3.0 - alpha) / 6.0


@dataclass(frozen=True)
class LaplaceParameter:
    u: float
    log_u: float


def compute_u(t, alpha, beta, r):
    """u = exp(-2 beta t^{1-kappa} - r t^mu); ``log_u`` survives underflow."""
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)", field="alpha", value=alpha)
    kappa, mu = exponents(alpha)
    log_u = -2.0 * beta * t ** (1.0 - kappa) - r * t ** mu
    return LaplaceParameter(u=math.exp(log_u) if log_u > -745.0 else 0.0, log_u=log_u)


def g_function(z, t, alpha, beta):
    """G(z) = log Gamma(t^{-kappa} z) - beta^2 z^2 / 2 + 2 beta z."""
    c = t ** (-exponents(alpha)[0])
    z = np.asarray(z, dtype=complex)
    return log_gamma(c * z) - beta * beta * z * z / 2.0 + 2.0 * beta * z


def g_derivatives(z, t, alpha, beta):
    """(G', G'', G''') at z."""
    c = t ** (-exponents(alpha)[0])
    w = c * np.asarray(z, dtype=complex)
    g1 = polygamma(0, w) * c - beta * beta * z + 2.0 * beta
    g2 = polygamma(1, w) * c * c - beta * beta
    g3 = polygamma(2, w) * c ** 3
    return g1, g2, g3


def critical_residual(v, beta):
    return -1.0 / v - beta * beta * v + 2.0 * beta


def critical_point(beta):
    """(1 / beta, residual of -1/v - beta^2 v + 2 beta there)."""
    if not beta > 0:
        raise ConfigError("beta must be > 0", field="beta", value=beta)
    v = 1.0 / beta
    return v, critical_residual(v, beta)


# --------------------------------------------------------------------------
# rescaled kernel


def _rescaled_log_integrand(p, delta_tilde):
    kappa, _ = exponents(p.alpha)
    c = p.t ** (-kappa)
    ta = p.t ** p.alpha
    rt = p.r * p.t ** (p.alpha / 3.0)
    b2 = p.beta * p.beta

    def q(z):
        return -b2 * z * z / 2.0 + 2.0 * p.beta * z

    def log_integrand(v, y):
        zeta = v + delta_tilde + 1j * y
        diff = -(delta_tilde + 1j * y)
        return (
            math.log(math.pi * c)
            - _log_sin(math.pi * c * diff)
            + p.n * (log_gamma(c * v) - log_gamma(c * zeta))
            + ta * (q(v) - q(zeta))
            + rt * diff
        )

    return log_integrand


def default_delta_tilde(beta):
    return 0.1 / beta


def rescaled_line(p, delta_tilde, radius):
    kappa, _ = exponents(p.alpha)
    c = p.t ** (-kappa)
    gap = min(delta_tilde - 2.0 * radius, 1.0 / c - delta_tilde)
    if gap <= 0:
        raise ContourError(
            "rescaled contour too large: need 2 * radius < delta~ < t^kappa",
            radius=radius,
            delta_tilde=delta_tilde,
        )
    ta = p.t ** p.alpha
    gauss = ta * p.beta ** 2 / 2.0
    probe = radius * np.exp(2j * math.pi * np.arange(32) / 32)
    T0 = math.sqrt(DECAY / gauss + delta_tilde ** 2)

    def omega_of(T):
        return (abs(p.r) * p.t ** (p.alpha / 3.0)
                + ta * (p.beta ** 2 * (radius + delta_tilde) + 2.0 * p.beta)
                + p.n * c * math.log(2.0 + c * (T + radius + delta_tilde))
                + math.pi * c)

    line = _build_line(_rescaled_log_integrand(p, delta_tilde), probe, T0, gap, 2.0 * radius + gap,
                       omega_of, gauss, 0.5 / c)
    _check_line_poles(c * (delta_tilde + 1j * line.y))
    return line


def kernel_rescaled(v, vp, p, delta_tilde=None, line=None):
    """
    K~_u(v~, v~') after v = t^{-kappa} v~, with zeta~ on v~ + delta~ + iR.

    ``p`` supplies n, t, alpha, beta and r; tau and u are implied
    (tau = beta^2 t, u from ``compute_u``).
    """
    delta_tilde = default_delta_tilde(p.beta) if delta_tilde is None else delta_tilde
    v = np.asarray(v, dtype=complex)
    vp = np.asarray(vp, dtype=complex)
    if np.any(np.real(v - vp) + delta_tilde <= 0):
        raise ContourError("Re(zeta~ - v~') <= 0 on the line", delta_tilde=delta_tilde)
    if line is None:
        radius = float(max(np.max(np.abs(v)), np.max(np.abs(vp))))
        line = rescaled_line(p, delta_tilde, radius)
    return _line_kernel(v, vp, _rescaled_log_integrand(p, delta_tilde), line, delta_tilde)


def rescaled_params(n, t, alpha, beta, r):
    """KernelParams for Z^n_{beta^2 t}(1) at the u of ``compute_u``."""
    return KernelParams(n=n, tau=beta * beta * t, log_u=compute_u(t, alpha, beta, r).log_u,
                        delta=0.5, r=r, beta=beta, t=t, alpha=alpha)


def laplace_rescaled(n, t, alpha, beta, r, delta_tilde=None, radius=None, resolution=16,
                     tol=DEFAULT_TOL, max_nodes=MAX_NODES):
    """det(I + K~_u) on the circle of ``radius`` (default 0.45 delta~)."""
    p = rescaled_params(n, t, alpha, beta, r)
    delta_tilde = default_delta_tilde(beta) if delta_tilde is None else delta_tilde
    radius = default_radius(delta_tilde) if radius is None else radius
    line = rescaled_line(p, delta_tilde, radius)
    contour = contours.circle(0.0, radius, resolution)
    result = fredholm_det(contour, lambda x, y: kernel_rescaled(x, y, p, delta_tilde, line),
                          tol=tol, max_nodes=max_nodes)
    return FredholmResult(value=result.value, nodes=result.nodes, last_delta=result.last_delta,
                          truncation=line.half_height,
                          extra={"s_nodes": line.size, "radius": radius, "delta_tilde": delta_tilde})


# --------------------------------------------------------------------------
# crossover kernel


def _cubic(x, r, beta):
    return -(beta ** 3) * x ** 3 / 3.0 + r * x


def ray_length(r, beta):
    """Length after which exp(-beta^3 rho^3 / 3 + |r| rho) < e^-37."""
    L = (3.0 * DECAY / beta ** 3) ** (1.0 / 3.0)
    for _ in range(4):
        L = (3.0 * (DECAY + abs(r) * L) / beta ** 3) ** (1.0 / 3.0)
    return L


def crossover_contours(r, beta, d=None, resolution=8):
    """(C_v, C_zeta): rays from 0 at +-2pi/3 and from d at +-pi/3."""
    d = 1.0 / (2.0 * beta) if d is None else d
    if d <= 0:
        raise ContourError("C_zeta must start right of 0", d=d)
    L = ray_length(r, beta) + d
    panel = min(0.5, d)
    c_v = contours.rays(0.0, 2.0 * math.pi / 3.0, L, resolution, panel)
    c_zeta = contours.rays(d, math.pi / 3.0, L, 2 * contours.PANEL_NODES, panel)
    return c_v, c_zeta


def kernel_limit(v, vp, r, beta, d=None, zeta_contour=None):
    """
    K^_r(v, v') = 1/(2 pi i) int_{C_zeta} e^{g(v) - g(zeta)} dzeta
                  / ((v - zeta)(zeta - v')),  g(x) = -beta^3 x^3 / 3 + r x.
    """
    if zeta_contour is None:
        zeta_contour = crossover_contours(r, beta, d)[1]
    z = zeta_contour.nodes
    wz = zeta_contour.weights / TWO_PI_I
    v = np.asarray(v, dtype=complex)
    vp = np.asarray(vp, dtype=complex)
    if _outer(v, vp):
        rows, cols = v[:, 0], vp[0, :]
        a = np.exp(_cubic(rows[:, None], r, beta) - _cubic(z[None, :], r, beta)) * wz[None, :] \
            / (rows[:, None] - z[None, :])
        b = 1.0 / (z[:, None] - cols[None, :])
        return a @ b
    v, vp = np.broadcast_arrays(v, vp)
    fv, fvp = v.ravel(), vp.ravel()
    terms = np.exp(_cubic(fv[:, None], r, beta) - _cubic(z[None, :], r, beta)) * wz[None, :] \
        / ((fv[:, None] - z[None, :]) * (z[None, :] - fvp[:, None]))
    return terms.sum(axis=1).reshape(v.shape)


def f_gue_via_crossover(r, beta, d=None, tol=DEFAULT_TOL, max_nodes=MAX_NODES * 2):
    """det(I + K^_r) on C_v; equals F_GUE(r / beta)."""
    c_v, c_zeta = crossover_contours(r, beta, d)
    result = fredholm_det(c_v, lambda x, y: kernel_limit(x, y, r, beta, zeta_contour=c_zeta),
                          tol=tol, max_nodes=max_nodes)
    if abs(result.value.imag) > IMAG_TOL:
        raise ConvergenceError("crossover determinant is not real", imag=result.value.imag)
    return result.real
