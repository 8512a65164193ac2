"""
Ensemble statistics: empirical CDFs, Kolmogorov-Smirnov distances against
the tabulated F2, bootstrap moment intervals and log-log exponent fits.
"""

import inspect
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.interpolate import PchipInterpolator

from .utils.common_utils import check_and_load_csv, make_stream

SUMMARY_COLUMNS = ["N", "n", "count", "ks", "mean", "mean_lo", "mean_hi", "sd", "sd_lo", "sd_hi"]
TW_TABLE_COLUMNS = ["r", "F2"]
MIN_BOOTSTRAP_COUNT = 30
BOOTSTRAP_STREAM = 0x424F_4F54
_RNG_KEYWORD = "rng" if "rng" in inspect.signature(stats.bootstrap).parameters else "random_state"

TW_TABLE_DESCRIPTION = """
Tracy-Widom 参考表 (tw-table 输出):
- r: 网格点, 严格递增
- F2: F_GUE(r), 单调不减, 取值 [0, 1]
"""


@dataclass(frozen=True)
class EmpiricalDistribution:
    sorted_values: np.ndarray

    def __post_init__(self):
        if self.sorted_values.ndim != 1 or self.sorted_values.size < 1:
            raise ValueError("empirical distribution needs at least one value")
        if np.any(np.diff(self.sorted_values) < 0):
            raise ValueError("values must be sorted ascending")

    @classmethod
    def from_samples(cls, values):
        values = np.asarray(values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("samples contain non-finite values")
        return cls(sorted_values=np.sort(values))

    @property
    def count(self):
        return self.sorted_values.size

    def quantile(self, q):
        return np.quantile(self.sorted_values, q)


def _as_distribution(dist):
    return dist if isinstance(dist, EmpiricalDistribution) else EmpiricalDistribution.from_samples(dist)


def ecdf(dist, x):
    """Fraction of values <= x."""
    dist = _as_distribution(dist)
    out = np.searchsorted(dist.sorted_values, x, side="right") / dist.count
    return float(out) if np.ndim(out) == 0 else out


def ks_distance(dist, F):
    """
    sup |ECDF - F| for a reference CDF ``F`` (vectorized callable),
    checking both sides of every jump of the empirical step function.
    """
    dist = _as_distribution(dist)
    m = dist.count
    x = dist.sorted_values
    upper = np.arange(1, m + 1) / m - np.asarray(F(x), dtype=float)
    # left limit F(x-) for the side just before each jump
    lower = np.asarray(F(np.nextafter(x, -np.inf)), dtype=float) - np.arange(m) / m
    return float(max(upper.max(), lower.max(), 0.0))


def dkw_threshold(m, level=0.01):
    """Distance exceeded with probability <= level (Dvoretzky-Kiefer-Wolfowitz)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.sqrt(math.log(2.0 / level) / (2.0 * m))


def two_sample_ks(a, b):
    """(statistic, p-value) of the two-sample KS test."""
    res = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class Interval:
    estimate: float
    low: float
    high: float


def _sd(x, axis=-1):
    return np.std(x, ddof=1, axis=axis)


def _skew(x, axis=-1):
    return stats.skew(x, axis=axis)


_STATISTICS = {"mean": np.mean, "sd": _sd, "skew": _skew}


def bootstrap_moments(dist, B=2000, seed=0, level=0.95, statistics=("mean", "sd", "skew")):
    """
    Percentile-bootstrap intervals for the mean, standard deviation and
    skewness: ``{"mean": Interval, "sd": Interval, "skew": Interval}``,
    restricted to the names in ``statistics``.
    """
    values = np.asarray(_as_distribution(dist).sorted_values)
    if values.size < MIN_BOOTSTRAP_COUNT:
        raise ValueError(f"bootstrap needs at least {MIN_BOOTSTRAP_COUNT} values, got {values.size}")
    chosen = {name: _STATISTICS[name] for name in statistics}
    if np.all(values == values[0]):
        mean = float(values[0])
        flat = {"mean": Interval(mean, mean, mean), "sd": Interval(0.0, 0.0, 0.0),
                "skew": Interval(math.nan, math.nan, math.nan)}
        return {name: flat[name] for name in chosen}
    out = {}
    for name, fn in chosen.items():
        k = list(_STATISTICS).index(name)
        res = stats.bootstrap(
            (values,),
            fn,
            n_resamples=B,
            batch=200,
            vectorized=True,
            confidence_level=level,
            method="percentile",
            **{_RNG_KEYWORD: make_stream(seed, BOOTSTRAP_STREAM, k)},
        )
        est = float(fn(values, axis=-1))
        out[name] = Interval(est, float(res.confidence_interval.low), float(res.confidence_interval.high))
    return out


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    slope_lo: float
    slope_hi: float
    stderr: float
    max_residual: float
    points: int

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_lo": self.slope_lo,
            "slope_hi": self.slope_hi,
            "stderr": self.stderr,
            "max_residual": self.max_residual,
            "points": self.points,
        }


def exponent_fit(pairs, level=0.95):
    """Least-squares slope of log y against log N with a t-interval."""
    pairs = [(float(N), float(y)) for N, y in pairs]
    if len({N for N, _ in pairs}) < 3:
        raise ValueError("exponent fit needs at least 3 distinct N")
    if any(N <= 0 or y <= 0 for N, y in pairs):
        raise ValueError("exponent fit needs positive N and values")
    x = np.log([N for N, _ in pairs])
    y = np.log([v for _, v in pairs])
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.5 + level / 2.0, len(pairs) - 2) * res.stderr
    resid = y - (res.intercept + res.slope * x)
    return ExponentFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        slope_lo=float(res.slope - half),
        slope_hi=float(res.slope + half),
        stderr=float(res.stderr),
        max_residual=float(np.max(np.abs(resid))),
        points=len(pairs),
    )


def tw_reference_from_table(df):
    """Monotone cubic interpolant of an ``r, F2`` table, clamped to 0 / 1 outside it."""
    r = np.asarray(df["r"], dtype=float)
    f = np.asarray(df["F2"], dtype=float)
    if np.any(np.diff(r) <= 0):
        raise ValueError("r column must be strictly increasing")
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("F2 column must be nondecreasing")
    spline = PchipInterpolator(r, f, extrapolate=False)

    def F(x):
        x = np.asarray(x, dtype=float)
        out = np.clip(np.nan_to_num(spline(x), nan=0.0), 0.0, 1.0)
        out = np.where(x < r[0], 0.0, out)
        return np.where(x > r[-1], 1.0, out)

    return F


def load_tw_reference(path):
    return tw_reference_from_table(check_and_load_csv(path, TW_TABLE_COLUMNS, TW_TABLE_DESCRIPTION))


def summary_row(N, n, values, F, B=2000, seed=0):
    """One row of the summary CSV for a normalized ensemble."""
    dist = EmpiricalDistribution.from_samples(values)
    row = {"N": N, "n": n, "count": dist.count, "ks": ks_distance(dist, F)}
    if dist.count >= MIN_BOOTSTRAP_COUNT:
        boot = bootstrap_moments(dist, B=B, seed=seed, statistics=("mean", "sd"))
        for name in ("mean", "sd"):
            row[name] = boot[name].estimate
            row[f"{name}_lo"] = boot[name].low
            row[f"{name}_hi"] = boot[name].high
    else:
        row["mean"] = float(np.mean(dist.sorted_values))
        row["sd"] = float(np.std(dist.sorted_values, ddof=1)) if dist.count > 1 else math.nan
        for key in ("mean_lo", "mean_hi", "sd_lo", "sd_hi"):
            row[key] = math.nan
    return row
