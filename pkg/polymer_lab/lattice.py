"""
Discrete directed polymer on the thin rectangle {1..N} x {1..n}.

Indexing: ``i`` in 1..N is the horizontal (time) coordinate and ``j`` in
1..n the vertical one. A disorder array has shape ``(N, n)`` and
``disorder[i - 1, j - 1] = W_ij``, so one lattice column is one contiguous
array row.

All partition functions are computed in log space by a single column sweep
(``advance_columns``) that the semi-discrete polymer and the path functional
share.
"""

import itertools
import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np
import pandas as pd
from numba import njit
from scipy.special import gammaln, logsumexp

from . import weights as wts
from .utils.common_utils import make_stream, map_blocks, report
from .utils.errors import (
    ConfigError,
    NonFiniteWeightError,
    ResourceLimitError,
    ShapeMismatchError,
)

# columns are generated in blocks of about this many weights
CHUNK_VALUES = 1 << 16
MAX_ENUMERATED_PATHS = 10 ** 6
MAX_CELLS_PER_SAMPLE = 2 * 10 ** 10

SAMPLE_COLUMNS = ["index", "N", "n", "alpha", "beta", "family", "seed", "log_z", "normalized"]


@dataclass(frozen=True)
class LatticeParams:
    """Rectangle size, inverse temperature and (for normalization) alpha."""

    N: int
    n: int
    beta: float
    alpha: float = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError("N must be an integer >= 1", field="N", value=self.N)
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be an integer >= 1", field="n", value=self.n)
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ConfigError("beta must be finite and > 0", field="beta", value=self.beta)
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)", field="alpha", value=self.alpha)

    @classmethod
    def from_alpha(cls, N, alpha, beta):
        return cls(N=int(N), n=rows_for(N, alpha), beta=float(beta), alpha=float(alpha))

    @property
    def cells(self):
        return self.N * self.n


@dataclass(frozen=True)
class FreeEnergySample:
    index: int
    log_z: float
    params: LatticeParams
    weight_family: str
    seed: int
    normalized: float = None
    last_passage: float = None

    def to_row(self):
        row = {
            "index": self.index,
            "N": self.params.N,
            "n": self.params.n,
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "family": self.weight_family,
            "seed": self.seed,
            "log_z": self.log_z,
            "normalized": self.normalized,
        }
        if self.last_passage is not None:
            row["last_passage"] = self.last_passage
        return row


def rows_for(N, alpha):
    """n = floor(N^alpha), never below 1."""
    # 1e-9 absorbs pow rounding such as 8000 ** (1 / 3) = 19.999999999999996
    return max(1, int(math.floor(N ** alpha + 1e-9)))


# --------------------------------------------------------------------------
# column sweep


@njit(cache=True)
def _logaddexp(a, b):
    if a < b:
        a, b = b, a
    if b == -np.inf:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def _advance(state, block, beta, vertical_collects, zero_temperature):
    rows = state.shape[0]
    for c in range(block.shape[0]):
        state[0] += beta * block[c, 0]
        for j in range(1, rows):
            w = beta * block[c, j]
            across = state[j] + w
            up = state[j - 1] + w if vertical_collects else state[j - 1]
            if zero_temperature:
                state[j] = across if across > up else up
            else:
                state[j] = _logaddexp(across, up)


def initial_state(rows, semi_discrete=False):
    """
    State before the first column.

    Lattice paths must start in cell (1, 1); semi-discrete paths may jump
    through every level at time 0.
    """
    if semi_discrete:
        return np.zeros(rows)
    state = np.full(rows, -np.inf)
    state[0] = 0.0
    return state


def advance_columns(state, block, beta, semi_discrete=False, zero_temperature=False):
    """
    Push ``state`` through the columns of ``block`` (shape columns x rows).

    Lattice cells collect their weight whichever way they are entered;
    semi-discrete level changes collect nothing. With ``zero_temperature``
    log-sum-exp becomes max-plus.
    """
    block = np.ascontiguousarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[1] != state.shape[0]:
        raise ShapeMismatchError(
            "column block does not match the state", block=list(block.shape), rows=state.shape[0]
        )
    _advance(state, block, float(beta), not semi_discrete, bool(zero_temperature))
    return state


def _check_disorder(params, disorder):
    disorder = np.asarray(disorder, dtype=np.float64)
    if disorder.shape != (params.N, params.n):
        raise ShapeMismatchError(
            f"disorder must have shape (N, n) = ({params.N}, {params.n})",
            shape=list(disorder.shape),
        )
    if not np.all(np.isfinite(disorder)):
        raise NonFiniteWeightError("disorder contains non-finite weights")
    return disorder


def log_partition(params, disorder):
    """log Z_{N,n}(beta) of a materialized disorder array."""
    disorder = _check_disorder(params, disorder)
    state = advance_columns(initial_state(params.n), disorder, params.beta)
    return float(state[-1])


def last_passage(params, disorder):
    """Maximum over up/right paths of the collected weight."""
    disorder = _check_disorder(params, disorder)
    state = advance_columns(initial_state(params.n), disorder, 1.0, zero_temperature=True)
    return float(state[-1])


# --------------------------------------------------------------------------
# path counting and brute-force oracles


def path_count(N, n):
    return math.comb(N + n - 2, n - 1)


def log_path_count(N, n):
    return float(gammaln(N + n - 1) - gammaln(n) - gammaln(N))


def _path_energies(params, disorder):
    N, n = params.N, params.n
    if path_count(N, n) > MAX_ENUMERATED_PATHS:
        raise ResourceLimitError(
            "too many paths to enumerate", paths=path_count(N, n), limit=MAX_ENUMERATED_PATHS
        )
    disorder = _check_disorder(params, disorder)
    steps = N + n - 2
    energies = []
    for ups in itertools.combinations(range(steps), n - 1):
        i = j = 0
        total = disorder[0, 0]
        up_set = set(ups)
        for s in range(steps):
            if s in up_set:
                j += 1
            else:
                i += 1
            total += disorder[i, j]
        energies.append(total)
    return np.array(energies)


def enumerate_log_partition(params, disorder):
    """log of the explicit sum over all up/right paths."""
    return float(logsumexp(params.beta * _path_energies(params, disorder)))


def enumerate_last_passage(params, disorder):
    return float(np.max(_path_energies(params, disorder)))


# --------------------------------------------------------------------------
# normalizations


def _require_alpha(params):
    if params.alpha is None:
        raise ConfigError("normalization needs alpha", field="alpha")
    return params.alpha


def normalize_free_energy(log_z, params, include_log_beta_shift=False):
    """
    (log Z - 2 beta N^{(1+alpha)/2}) / (beta N^{1/2 - alpha/6}).

    ``include_log_beta_shift`` also removes the 2(n - 1) log beta term
    relating the lattice to the semi-discrete polymer at unit temperature.
    """
    alpha = _require_alpha(params)
    N, beta = params.N, params.beta
    centred = log_z - 2.0 * beta * N ** ((1.0 + alpha) / 2.0)
    if include_log_beta_shift:
        centred -= 2.0 * (params.n - 1) * math.log(beta)
    return centred / (beta * N ** (0.5 - alpha / 6.0))


def lln_ratio(log_z, params):
    """log Z / (2 beta N^{(1+alpha)/2}); tends to 1."""
    alpha = _require_alpha(params)
    return log_z / (2.0 * params.beta * params.N ** ((1.0 + alpha) / 2.0))


def normalize_last_passage(L, N, n):
    return (L - 2.0 * math.sqrt(N * n)) / (math.sqrt(N) * n ** (-1.0 / 6.0))


# --------------------------------------------------------------------------
# streaming ensembles


def sample_disorder(params, spec, stream):
    """The full disorder array a streaming sample would consume."""
    return wts.sample(spec, stream, params.cells).reshape(params.N, params.n)


def chunk_columns(rows):
    return max(1, CHUNK_VALUES // rows)


def stream_sample(params, spec, stream, with_last_passage=False):
    """
    One (log Z, L) realization with weights drawn block by block.

    The draws are the same as ``sample_disorder`` on the same stream.
    """
    if params.cells > MAX_CELLS_PER_SAMPLE:
        raise ResourceLimitError(
            "sample exceeds the cell budget", cells=params.cells, limit=MAX_CELLS_PER_SAMPLE
        )
    state = initial_state(params.n)
    lpp = initial_state(params.n) if with_last_passage else None
    step = chunk_columns(params.n)
    done = 0
    while done < params.N:
        cols = min(step, params.N - done)
        block = wts.sample(spec, stream, cols * params.n).reshape(cols, params.n)
        advance_columns(state, block, params.beta)
        if lpp is not None:
            advance_columns(lpp, block, 1.0, zero_temperature=True)
        done += cols
    return float(state[-1]), (float(lpp[-1]) if lpp is not None else None)


def sample_stream(seed, params, index, key=()):
    """Stream of sample ``index``, keyed by the rectangle shape and ``key``."""
    return make_stream(seed, params.N, params.n, *key, index)


def _ensemble_block(params, spec, seed, with_last_passage, key, start, stop):
    out = []
    for index in range(start, stop):
        log_z, lpp = stream_sample(params, spec, sample_stream(seed, params, index, key), with_last_passage)
        normalized = normalize_free_energy(log_z, params) if params.alpha is not None else None
        out.append(
            FreeEnergySample(
                index=index,
                log_z=log_z,
                params=params,
                weight_family=spec.family,
                seed=seed,
                normalized=normalized,
                last_passage=lpp,
            )
        )
    return out


def ensemble(params, spec, count, seed, workers=1, with_last_passage=False, key=()):
    """
    ``count`` independent samples; sample ``k`` uses stream
    ``(seed, N, n, *key, k)``, so different shapes never share draws while
    different beta on one shape see the same disorder.

    Output is sorted by index and does not depend on ``workers``.
    """
    if count < 1:
        raise ConfigError("count must be >= 1", field="count", value=count)
    t0 = time.time()
    report(f"🔄 lattice ensemble N={params.N} n={params.n} beta={params.beta} "
           f"{spec.family} x{count}")
    task = partial(_ensemble_block, params, spec, int(seed), with_last_passage, tuple(int(k) for k in key))
    samples = map_blocks(task, count, workers)
    report(f"✅ lattice ensemble done in {time.time() - t0:.1f}s")
    return samples


def samples_frame(samples):
    """DataFrame in the ensemble CSV layout."""
    df = pd.DataFrame([s.to_row() for s in samples])
    cols = SAMPLE_COLUMNS + [c for c in df.columns if c not in SAMPLE_COLUMNS]
    return df[cols]
