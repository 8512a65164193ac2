"""
Skorohod coupling between the lattice polymer and the semi-discrete one.

Each weight W is embedded in a Brownian motion as the exit value of a
random interval [u, v] containing 0, with (u, v) drawn with density
proportional to (v - u) mu(du) mu(dv). Running the embedding N times along
one Brownian path gives a random walk S(k) = B(tau_1 + ... + tau_k) with
the weight law as its step distribution; the lattice partition function of
its increments is F_N of the rescaled walk.

Brownian paths live on a fine grid of step h_B = 1 / steps_per_unit and
exits are detected at the first grid crossing, so embedded values overshoot
the barriers by O(sqrt(h_B)).
"""

import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np
import pandas as pd
from numba import njit
from scipy import ndimage

from . import weights as wts
from .ensemble_stats import exponent_fit
from .lattice import LatticeParams, log_partition, rows_for
from .semidiscrete import BrownianGrid, OYParams, log_partition_oy
from .utils.common_utils import make_stream, map_blocks, report
from .utils.errors import (
    ConfigError,
    GridExhaustedError,
    ResourceLimitError,
    ShapeMismatchError,
    TruncationError,
)

TRUNCATION_QUANTILE = 1e-8
MAX_TRUNCATED_WIDTH = 1e3
MAX_FINE_POINTS = 5 * 10 ** 7
DEFAULT_STEPS_PER_UNIT = 1000
DEFAULT_OY_PER_UNIT = 8
LIPSCHITZ_SLACK = 1e-9

GAP_COLUMNS = ["N", "n", "beta", "family", "gap1_median", "gap1_q90", "gap2_median", "gap2_q90", "normalizer"]


@dataclass(frozen=True)
class EmbeddingPair:
    u: float
    v: float

    def __post_init__(self):
        if not self.u <= 0 <= self.v:
            raise ValueError(f"embedding pair needs u <= 0 <= v, got ({self.u}, {self.v})")


@dataclass
class CoupledPaths:
    """
    One embedding realization for n rows.

    ``brownian[j, k] = B^j(k)`` and ``embedded_walk[j, k] = S^j(k)`` for
    k = 0..N; ``stopping_indices[j, k - 1]`` is the fine-grid index of
    tau_1 + ... + tau_k.
    """

    brownian: np.ndarray
    embedded_walk: np.ndarray
    stopping_indices: np.ndarray
    steps_per_unit: int
    sup_distance: np.ndarray
    oy_increments: np.ndarray = None
    brownian_fine: np.ndarray = None

    @property
    def n(self):
        return self.brownian.shape[0]

    @property
    def N(self):
        return self.brownian.shape[1] - 1

    def walk_increments(self):
        """S^j(k) - S^j(k-1) as an (N, n) disorder array."""
        return np.ascontiguousarray(np.diff(self.embedded_walk, axis=1).T)

    def rescaled_walk(self, t):
        """S-bar_N(t): linear interpolation of S(Nt)."""
        k = np.arange(self.N + 1) / self.N
        return np.array([np.interp(t, k, row) for row in self.embedded_walk])

    def rescaled_brownian(self, t):
        """B-bar_N(t) = B(Nt), from the fine path when it was kept."""
        if self.brownian_fine is not None:
            grid = np.arange(self.brownian_fine.shape[1]) / (self.steps_per_unit * self.N)
            return np.array([np.interp(t, grid, row) for row in self.brownian_fine])
        k = np.arange(self.N + 1) / self.N
        return np.array([np.interp(t, k, row) for row in self.brownian])


# --------------------------------------------------------------------------
# embedding pairs


def _discrete_pair_table(spec):
    values, probs = wts.discrete_atoms(spec)
    neg = values < 0
    pos = values > 0
    zero_mass = float(probs[~neg & ~pos].sum())
    us, vs = np.meshgrid(values[neg], values[pos], indexing="ij")
    pu, pv = np.meshgrid(probs[neg], probs[pos], indexing="ij")
    weight = ((vs - us) * pu * pv).ravel()
    us, vs = us.ravel(), vs.ravel()
    if zero_mass > 0:
        us = np.append(us, 0.0)
        vs = np.append(vs, 0.0)
        # the tilted pairs carry total mass E[W^-] (1 - p0)
        neg_part = float(-(values[neg] * probs[neg]).sum())
        weight = np.append(weight, zero_mass * neg_part)
    cum = np.cumsum(weight)
    return us, vs, cum / cum[-1]


def _continuous_pairs(spec, stream, count, batch=4096):
    dist = wts.distribution(spec)
    q_lo, q_hi = TRUNCATION_QUANTILE, 1.0 - TRUNCATION_QUANTILE
    u_min, v_max = float(dist.ppf(q_lo)), float(dist.ppf(q_hi))
    if v_max - u_min > MAX_TRUNCATED_WIDTH:
        raise TruncationError(
            "truncated support too wide for rejection sampling",
            family=spec.family,
            width=v_max - u_min,
            truncated_mass=2 * TRUNCATION_QUANTILE,
        )
    f0 = float(dist.cdf(0.0))
    width = v_max - u_min
    us, vs = [], []
    got = 0
    while got < count:
        draws = stream.random(3 * batch).reshape(batch, 3)
        u = dist.ppf(q_lo + draws[:, 0] * (f0 - q_lo))
        v = dist.ppf(f0 + draws[:, 1] * (q_hi - f0))
        keep = draws[:, 2] * width < (v - u)
        us.append(u[keep])
        vs.append(v[keep])
        got += int(keep.sum())
    return np.concatenate(us)[:count], np.concatenate(vs)[:count]


def skorohod_pairs(spec, stream, count):
    """
    ``count`` barrier pairs (u, v) with density ~ (v - u) mu(du) mu(dv).

    Atomic laws are sampled exactly (an atom at 0 gives the pair (0, 0)
    with probability mu({0})); continuous laws by rejection on the support
    truncated at the 1e-8 quantiles.
    """
    if not wts.is_standardized(spec, tol=1e-9):
        raise ConfigError("embedding needs a standardized weight spec", family=spec.family)
    if count == 0:
        return np.empty(0), np.empty(0)
    if wts.discrete_atoms(spec) is not None:
        us, vs, cum = _discrete_pair_table(spec)
        idx = np.searchsorted(cum, stream.random(count), side="right")
        idx = np.minimum(idx, len(cum) - 1)
        return us[idx], vs[idx]
    return _continuous_pairs(spec, stream, count)


def skorohod_pair(spec, stream):
    u, v = skorohod_pairs(spec, stream, 1)
    return EmbeddingPair(float(u[0]), float(v[0]))


def exit_values(u, v, stream):
    """Exact exit side of Brownian motion from [u, v]: v with probability -u / (v - u)."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    span = v - u
    p_up = np.divide(-u, span, out=np.zeros_like(span), where=span > 0)
    return np.where(stream.random(u.shape[0]) < p_up, v, u)


# --------------------------------------------------------------------------
# walking the barriers along a fine Brownian path


@njit(cache=True)
def _first_exits(path, lower, upper, stops):
    s = 0
    last = path.shape[0] - 1
    for k in range(lower.shape[0]):
        base = path[s]
        m = s + 1
        while m <= last:
            d = path[m] - base
            if d >= upper[k] or d <= lower[k]:
                break
            m += 1
        if m > last:
            return k
        stops[k] = m
        s = m
    return lower.shape[0]


@njit(cache=True)
def _sup_gap(path, walk, q):
    N = walk.shape[0] - 1
    worst = 0.0
    for m in range(N * q + 1):
        k = m // q
        if k == N:
            interp = walk[N]
        else:
            frac = (m - k * q) / q
            interp = walk[k] + frac * (walk[k + 1] - walk[k])
        gap = abs(path[m] - interp)
        if gap > worst:
            worst = gap
    return worst


def _fine_points(spec, N, steps_per_unit):
    try:
        m4 = wts.exact_moments(spec, 4)
    except ValueError:
        m4 = 100.0
    margin = 8.0 * math.sqrt(2.0 * N * m4) + 20.0
    return int(math.ceil((N + margin) * steps_per_unit))


def embed_walk(spec, n, N, stream, steps_per_unit=DEFAULT_STEPS_PER_UNIT,
               oy_per_unit=None, keep_fine=False):
    """
    Embed N steps of the weight walk in each of n Brownian rows.

    Each row draws its N barrier pairs, then its fine path, then walks the
    barriers. With ``oy_per_unit`` the fine path is also subsampled to a
    Brownian grid on [0, N] for the semi-discrete partition function.
    """
    if N < 1 or n < 1:
        raise ConfigError("embedding needs N >= 1 and n >= 1", N=N, n=n)
    q = int(steps_per_unit)
    if q < 1:
        raise ConfigError("steps_per_unit must be >= 1", field="steps_per_unit", value=steps_per_unit)
    if oy_per_unit is not None and q % oy_per_unit:
        raise ConfigError("oy_per_unit must divide steps_per_unit", oy_per_unit=oy_per_unit, steps_per_unit=q)
    points = _fine_points(spec, N, q)
    if points > MAX_FINE_POINTS:
        raise ResourceLimitError("fine Brownian grid too large", points=points, limit=MAX_FINE_POINTS)

    brownian = np.empty((n, N + 1))
    walk = np.empty((n, N + 1))
    stops = np.empty((n, N), dtype=np.int64)
    sup = np.empty(n)
    oy = np.empty((n, N * oy_per_unit)) if oy_per_unit else None
    fine_rows = [] if keep_fine else None
    sqrt_h = math.sqrt(1.0 / q)

    for j in range(n):
        u, v = skorohod_pairs(spec, stream, N)
        path = np.empty(points + 1)
        path[0] = 0.0
        np.cumsum(sqrt_h * stream.standard_normal(points), out=path[1:])
        done = _first_exits(path, u, v, stops[j])
        if done < N:
            raise GridExhaustedError(
                "Brownian grid exhausted before all stops were placed",
                row=j,
                stops_placed=int(done),
                N=N,
                grid_time=points / q,
            )
        walk[j, 0] = 0.0
        walk[j, 1:] = path[stops[j]]
        brownian[j] = path[: N * q + 1 : q]
        sup[j] = _sup_gap(path, walk[j], q)
        if oy is not None:
            oy[j] = np.diff(path[: N * q + 1 : q // oy_per_unit])
        if keep_fine:
            fine_rows.append(path[: N * q + 1].copy())

    return CoupledPaths(
        brownian=brownian,
        embedded_walk=walk,
        stopping_indices=stops,
        steps_per_unit=q,
        sup_distance=sup,
        oy_increments=oy,
        brownian_fine=np.array(fine_rows) if keep_fine else None,
    )


# --------------------------------------------------------------------------
# the path functional and its Lipschitz bound


def _as_rows(f, N=None):
    f = np.atleast_2d(np.asarray(f, dtype=float))
    if N is not None and f.shape[1] != N + 1:
        raise ShapeMismatchError("functions must be sampled at 0, 1/N, ..., 1", columns=f.shape[1], N=N)
    return f


def functional_F_N(f, N, beta):
    """
    log of the sum over 1/N = t_0 <= ... <= t_n = 1 on the 1/N grid of
    exp(beta * sum_j (f^j(t_j) - f^j(t_{j-1} - 1/N))).

    ``f`` has one row per function with values at 0, 1/N, ..., 1, so the
    left-edge value f^j(t_0 - 1/N) is f^j(0).
    """
    f = _as_rows(f, N)
    increments = np.ascontiguousarray(np.diff(f, axis=1).T)
    return log_partition(LatticeParams(N=N, n=f.shape[0], beta=beta), increments)


def path_metric(f, g):
    """Sum over rows of the sup-norm distance on the common grid."""
    f, g = _as_rows(f), _as_rows(g)
    if f.shape != g.shape:
        raise ShapeMismatchError("paths live on different grids", f=list(f.shape), g=list(g.shape))
    return float(np.sum(np.max(np.abs(f - g), axis=1)))


def lipschitz_check(f, g, N, beta):
    lhs = abs(functional_F_N(f, N, beta) - functional_F_N(g, N, beta))
    rhs = 2.0 * beta * path_metric(f, g)
    return lhs, rhs, lhs <= rhs + LIPSCHITZ_SLACK


# --------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class GapSample:
    index: int
    N: int
    n: int
    gap1: float
    gap2: float
    sup_distance: float


def gap_envelope(n, N, beta):
    """2 beta n u + log(n!) at u = 3 sqrt(log(nN))."""
    u = 3.0 * math.sqrt(math.log(n * N)) if n * N > 1 else 0.0
    return 2.0 * beta * n * u + math.lgamma(n + 1)


def _gap_block(spec, N, n, beta, seed, steps_per_unit, oy_per_unit, key, start, stop):
    out = []
    oy_params = OYParams(n=n, t=float(N), beta=beta, mesh=N * oy_per_unit)
    for index in range(start, stop):
        paths = embed_walk(spec, n, N, make_stream(seed, N, *key, index), steps_per_unit, oy_per_unit)
        f_walk = functional_F_N(paths.embedded_walk, N, beta)
        f_brown = functional_F_N(paths.brownian, N, beta)
        log_oy = log_partition_oy(oy_params, BrownianGrid(increments=paths.oy_increments, t=float(N)))
        out.append(GapSample(index=index, N=N, n=n, gap1=abs(f_walk - f_brown),
                             gap2=abs(f_brown - log_oy), sup_distance=float(paths.sup_distance[0])))
    return out


def coupling_gap_experiment(spec, alpha, N_list, beta, count, seed,
                            steps_per_unit=DEFAULT_STEPS_PER_UNIT, oy_per_unit=DEFAULT_OY_PER_UNIT,
                            workers=1, key=()):
    """
    Per N: distribution of |F_N(S-bar) - F_N(B-bar)| and |F_N(B-bar) - log Z^OY|
    divided by N^{1/2 - alpha/6}. Returns ``(summary, samples)`` frames.
    """
    rows, sample_rows = [], []
    for N in N_list:
        n = rows_for(N, alpha)
        t0 = time.time()
        report(f"🔄 coupling gap N={N} n={n} x{count}")
        task = partial(_gap_block, spec, int(N), n, float(beta), int(seed), steps_per_unit, oy_per_unit,
                       tuple(int(k) for k in key))
        samples = map_blocks(task, count, workers)
        normalizer = N ** (0.5 - alpha / 6.0)
        gap1 = np.array([s.gap1 for s in samples]) / normalizer
        gap2 = np.array([s.gap2 for s in samples]) / normalizer
        envelope = gap_envelope(n, N, beta)
        rows.append({
            "N": N,
            "n": n,
            "beta": beta,
            "family": spec.family,
            "gap1_median": float(np.median(gap1)),
            "gap1_q90": float(np.quantile(gap1, 0.9)),
            "gap2_median": float(np.median(gap2)),
            "gap2_q90": float(np.quantile(gap2, 0.9)),
            "normalizer": normalizer,
            "envelope": envelope,
            "envelope_fraction": float(np.mean(np.array([s.gap2 for s in samples]) <= envelope)),
        })
        sample_rows.extend(
            {"index": s.index, "N": s.N, "n": s.n, "gap1": s.gap1, "gap2": s.gap2,
             "sup_distance": s.sup_distance}
            for s in samples
        )
        report(f"✅ N={N} done in {time.time() - t0:.1f}s")
    return pd.DataFrame(rows), pd.DataFrame(sample_rows)


def non_increasing(values, slack=0.0):
    values = list(values)
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def sup_distance_growth(spec, N_list, count, seed, steps_per_unit=DEFAULT_STEPS_PER_UNIT):
    """
    Mean of ||S-bar^1_N - B-bar^1_N||_inf per N and the fitted growth
    exponent of that mean in N.
    """
    rows = []
    for N in N_list:
        sups = np.array([
            embed_walk(spec, 1, N, make_stream(seed, N, k), steps_per_unit).sup_distance[0]
            for k in range(count)
        ])
        rows.append({"N": N, "mean_sup": float(sups.mean()),
                     "se": float(sups.std(ddof=1) / math.sqrt(count)) if count > 1 else math.nan})
    table = pd.DataFrame(rows)
    fit = exponent_fit(list(zip(table["N"], table["mean_sup"]))) if len(N_list) >= 3 else None
    return table, fit


def simplex_cell_volume(indices):
    """
    Lebesgue measure of the jump times s_1 <= ... <= s_m whose ceilings are
    the given nondecreasing integers: the product over runs of equal
    indices of 1 / (run length)!.
    """
    indices = list(indices)
    if any(b < a for a, b in zip(indices, indices[1:])):
        raise ValueError("indices must be nondecreasing")
    volume = 1.0
    run = 1
    for a, b in zip(indices, indices[1:]):
        if a == b:
            run += 1
        else:
            volume /= math.factorial(run)
            run = 1
    if indices:
        volume /= math.factorial(run)
    return volume


@dataclass(frozen=True)
class ModulusEstimate:
    r: float
    x: float
    probability: float
    count: int

    def bound(self, k1, k2=0.5):
        return k1 / self.r * math.exp(-k2 * self.x ** 2 / self.r)


def modulus_check(t_max, r, x, count, stream, steps=1000, batch=1000):
    """
    Monte Carlo estimate of P(sup_{|t-s| <= r} |B(s) - B(t)| > x) on [0, t_max].

    The oscillation over every window of length r is max - min of the
    window, taken with sliding max/min filters.
    """
    if not 0 < r < t_max or x <= 0:
        raise ConfigError("modulus check needs 0 < r < t_max and x > 0", r=r, x=x, t_max=t_max)
    dt = t_max / steps
    window = int(math.floor(r / dt)) + 1
    hits = 0
    done = 0
    while done < count:
        size = min(batch, count - done)
        paths = np.zeros((size, steps + 1))
        np.cumsum(math.sqrt(dt) * stream.standard_normal((size, steps)), axis=1, out=paths[:, 1:])
        hi = ndimage.maximum_filter1d(paths, size=window, axis=1, mode="nearest")
        lo = ndimage.minimum_filter1d(paths, size=window, axis=1, mode="nearest")
        hits += int(np.sum(np.max(hi - lo, axis=1) > x))
        done += size
    return ModulusEstimate(r=r, x=x, probability=hits / count, count=count)


def fit_modulus_constants(table, k2=0.5):
    """
    Smallest K_1 with p <= (K_1 / r) exp(-k2 x^2 / r) on every row of a
    ``r, x, probability`` table.
    """
    r = np.asarray(table["r"], dtype=float)
    x = np.asarray(table["x"], dtype=float)
    p = np.asarray(table["probability"], dtype=float)
    return float(np.max(p * r * np.exp(k2 * x ** 2 / r)))
