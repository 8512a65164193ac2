"""
Semi-discrete (O'Connell-Yor) polymer on a uniform time mesh.

n independent Brownian motions are sampled as increments on the grid
h = t / M. The partition function integrates exp(beta * energy) over the
simplex of jump times 0 <= t_1 <= ... <= t_{n-1} <= t; here the integral is
the left-endpoint Riemann sum over grid jump times, evaluated by the same
column sweep as the lattice polymer with (n - 1) log h attached at the end.
"""

import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np
import pandas as pd

from .lattice import advance_columns, chunk_columns, initial_state, rows_for
from .utils.common_utils import make_stream, map_blocks, report
from .utils.errors import ConfigError, ConvergenceError, ShapeMismatchError

SAMPLE_COLUMNS = ["index", "n", "t", "beta", "alpha", "mesh", "seed", "log_z", "normalized"]

# spawn-key prefixes of the pilot streams used by ``choose_mesh`` and ``choose_mesh_laplace``
PILOT_STREAM = 0x5049_4C54
LAPLACE_PILOT_STREAM = 0x4C41_504C
MESH_TOLERANCE = 0.05


@dataclass(frozen=True)
class OYParams:
    n: int
    t: float
    beta: float
    mesh: int
    alpha: float = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be an integer >= 1", field="n", value=self.n)
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ConfigError("t must be finite and > 0", field="t", value=self.t)
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ConfigError("beta must be finite and > 0", field="beta", value=self.beta)
        if int(self.mesh) != self.mesh or self.mesh < self.n:
            raise ConfigError("mesh must be an integer >= n", field="mesh", value=self.mesh)
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)", field="alpha", value=self.alpha)

    @property
    def h(self):
        return self.t / self.mesh

    @classmethod
    def from_alpha(cls, t, alpha, beta, mesh=None):
        n = rows_for(t, alpha)
        return cls(n=n, t=float(t), beta=float(beta), mesh=mesh or default_mesh(n, t, beta), alpha=alpha)


@dataclass(frozen=True)
class BrownianGrid:
    """``increments[j, k] = B^{j+1}((k+1) h) - B^{j+1}(k h)``."""

    increments: np.ndarray
    t: float

    @property
    def n(self):
        return self.increments.shape[0]

    @property
    def mesh(self):
        return self.increments.shape[1]

    @property
    def h(self):
        return self.t / self.mesh

    def paths(self):
        """Path values at the grid times 0, h, ..., t (shape n x (M + 1))."""
        out = np.zeros((self.n, self.mesh + 1))
        np.cumsum(self.increments, axis=1, out=out[:, 1:])
        return out


@dataclass(frozen=True)
class OYSample:
    index: int
    log_z: float
    params: OYParams
    seed: int
    normalized: float = None
    last_passage: float = None

    def to_row(self):
        row = {
            "index": self.index,
            "n": self.params.n,
            "t": self.params.t,
            "beta": self.params.beta,
            "alpha": self.params.alpha,
            "mesh": self.params.mesh,
            "seed": self.seed,
            "log_z": self.log_z,
            "normalized": self.normalized,
        }
        if self.last_passage is not None:
            row["last_passage"] = self.last_passage
        return row


def default_mesh(n, t, beta):
    return int(max(64 * n, math.ceil(32.0 * beta * beta * t)))


def _draw_columns(stream, columns, rows, h):
    # time-major draws: block k holds the increments of every row on step k
    return math.sqrt(h) * stream.standard_normal(columns * rows).reshape(columns, rows)


def sample_brownian_grid(params, stream):
    """i.i.d. Normal(0, t / M) increments, drawn time step by time step."""
    cols = _draw_columns(stream, params.mesh, params.n, params.h)
    return BrownianGrid(increments=np.ascontiguousarray(cols.T), t=params.t)


def _check_grid(params, grid):
    if grid.increments.shape != (params.n, params.mesh):
        raise ShapeMismatchError(
            f"grid must have shape (n, M) = ({params.n}, {params.mesh})",
            shape=list(grid.increments.shape),
        )
    if not math.isclose(grid.t, params.t, rel_tol=1e-12):
        raise ShapeMismatchError("grid horizon differs from params.t", grid_t=grid.t, t=params.t)


def log_partition_oy(params, grid):
    """(n - 1) log h + log of the grid sum over nondecreasing jump indices."""
    _check_grid(params, grid)
    state = advance_columns(initial_state(params.n, semi_discrete=True), grid.increments.T, params.beta,
                            semi_discrete=True)
    return float(state[-1]) + (params.n - 1) * math.log(params.h)


def last_passage_oy(params, grid):
    """Zero-temperature value: max over grid jump times of the energy."""
    _check_grid(params, grid)
    state = advance_columns(initial_state(params.n, semi_discrete=True), grid.increments.T, 1.0,
                            semi_discrete=True, zero_temperature=True)
    return float(state[-1])


def brownian_scaling_transport(grid, beta):
    """Coupled grid on [0, beta^2 t]: every increment multiplied by beta."""
    if beta <= 0:
        raise ConfigError("beta must be > 0", field="beta", value=beta)
    return BrownianGrid(increments=grid.increments * beta, t=grid.t * beta * beta)


def refine_grid(grid, stream):
    """
    Halve the mesh by Brownian-bridge midpoints.

    An increment X on a step of length h splits into X/2 + Y and X/2 - Y
    with Y ~ Normal(0, h/4) independent of everything else.
    """
    n, M = grid.increments.shape
    bridge = math.sqrt(grid.h / 4.0) * stream.standard_normal(M * n).reshape(M, n).T
    fine = np.empty((n, 2 * M))
    fine[:, 0::2] = grid.increments / 2.0 + bridge
    fine[:, 1::2] = grid.increments / 2.0 - bridge
    return BrownianGrid(increments=fine, t=grid.t)


def oy_exponents(alpha):
    """(kappa, mu) = ((1 - alpha)/2, (3 - alpha)/6)."""
    if not 0 <= alpha <= 1:
        raise ConfigError("alpha must lie in [0, 1]", field="alpha", value=alpha)
    return (1.0 - alpha) / 2.0, (3.0 - alpha) / 6.0


def normalize_oy(log_z, t, alpha, beta):
    """(log_z - 2 beta t^{1-kappa}) / (beta t^mu)."""
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)", field="alpha", value=alpha)
    kappa, mu = oy_exponents(alpha)
    return (log_z - 2.0 * beta * t ** (1.0 - kappa)) / (beta * t ** mu)


def normalize_oy_sample(log_z, params):
    """
    Normalized statistic of a simulated log Z^n_t(beta).

    Brownian scaling maps it exactly to log Z^n_{beta^2 t}(1) - 2(n-1) log beta,
    the quantity whose fluctuations are Tracy-Widom.
    """
    unit = log_z + 2.0 * (params.n - 1) * math.log(params.beta)
    return normalize_oy(unit, params.t, params.alpha, params.beta)


@dataclass(frozen=True)
class MeshChoice:
    mesh: int
    delta: float
    tolerance: float
    doublings: int


def choose_mesh(n, t, beta, alpha=None, seed=0, pilots=8, max_doublings=6):
    """
    Default mesh, doubled until pilot samples move by less than
    0.05 * beta * t^mu under one Brownian-bridge refinement.
    """
    mu = oy_exponents(alpha)[1] if alpha is not None else 0.5
    tolerance = MESH_TOLERANCE * beta * t ** mu
    mesh = default_mesh(n, t, beta)
    grids = [
        sample_brownian_grid(OYParams(n, t, beta, mesh), make_stream(seed, PILOT_STREAM, p))
        for p in range(pilots)
    ]
    coarse = [log_partition_oy(OYParams(n, t, beta, mesh), g) for g in grids]
    delta = math.inf
    for doubling in range(max_doublings + 1):
        fine_params = OYParams(n, t, beta, 2 * mesh)
        grids = [
            refine_grid(g, make_stream(seed, PILOT_STREAM, p, doubling + 1)) for p, g in enumerate(grids)
        ]
        fine = [log_partition_oy(fine_params, g) for g in grids]
        delta = float(np.max(np.abs(np.subtract(fine, coarse))))
        report(f"🔄 mesh {mesh} -> {2 * mesh}: max |delta log Z| = {delta:.4g} (tol {tolerance:.4g})")
        if delta < tolerance:
            return MeshChoice(mesh=mesh, delta=delta, tolerance=tolerance, doublings=doubling)
        mesh, coarse = 2 * mesh, fine
    raise ConvergenceError(
        "mesh refinement did not settle",
        mesh=mesh,
        last_delta=delta,
        tolerance=tolerance,
        last_values=[float(coarse[0]), float(fine[0])],
    )


def choose_mesh_laplace(n, t, u_list, count, beta=1.0, seed=0, pilots=2000, max_doublings=6):
    """
    Mesh for a Monte Carlo estimate of E[exp(-u Z)] from ``count`` samples.

    Each pilot grid is refined by Brownian-bridge midpoints, so consecutive
    meshes see the same Brownian paths. Doubling stops at the first step
    where, for every u, the mean change of exp(-u Z) plus its standard error
    drops below the Monte Carlo standard error of the full run; the finer
    mesh of that step is returned.
    """
    u = np.asarray(u_list, dtype=float)
    if u.size == 0 or np.any(u <= 0):
        raise ConfigError("u_list must hold values > 0", field="u_list", value=list(u_list))
    if count < 1 or pilots < 2:
        raise ConfigError("count must be >= 1 and pilots >= 2", count=count, pilots=pilots)
    base = default_mesh(n, t, beta)
    log_z = np.empty((pilots, max_doublings + 2))
    for p in range(pilots):
        grid = sample_brownian_grid(OYParams(n, t, beta, base), make_stream(seed, LAPLACE_PILOT_STREAM, p))
        for level in range(max_doublings + 2):
            if level:
                grid = refine_grid(grid, make_stream(seed, LAPLACE_PILOT_STREAM, p, level))
            log_z[p, level] = log_partition_oy(OYParams(n, t, beta, grid.mesh), grid)

    laplace = np.exp(-u[None, None, :] * np.exp(log_z)[:, :, None])
    tolerance = laplace[:, -1, :].std(axis=0, ddof=1) / math.sqrt(count)
    delta = math.inf
    for level in range(max_doublings + 1):
        change = laplace[:, level + 1, :] - laplace[:, level, :]
        score = np.abs(change.mean(axis=0)) + change.std(axis=0, ddof=1) / math.sqrt(pilots)
        delta = float(np.max(score / tolerance))
        mesh = base * 2 ** (level + 1)
        report(f"🔄 mesh {mesh // 2} -> {mesh}: max Laplace change / MC error = {delta:.3g}")
        if delta < 1.0:
            return MeshChoice(mesh=mesh, delta=float(np.max(score)), tolerance=float(np.min(tolerance)),
                              doublings=level + 1)
    raise ConvergenceError(
        "mesh refinement did not settle the Laplace statistic",
        mesh=base * 2 ** (max_doublings + 1),
        last_ratio=delta,
        tolerance=tolerance.tolist(),
    )


def stream_sample_oy(params, stream, with_last_passage=False):
    """One realization drawn block by block; same draws as ``sample_brownian_grid``."""
    state = initial_state(params.n, semi_discrete=True)
    lpp = initial_state(params.n, semi_discrete=True) if with_last_passage else None
    step = chunk_columns(params.n)
    done = 0
    while done < params.mesh:
        cols = min(step, params.mesh - done)
        block = _draw_columns(stream, cols, params.n, params.h)
        advance_columns(state, block, params.beta, semi_discrete=True)
        if lpp is not None:
            advance_columns(lpp, block, 1.0, semi_discrete=True, zero_temperature=True)
        done += cols
    log_z = float(state[-1]) + (params.n - 1) * math.log(params.h)
    return log_z, (float(lpp[-1]) if lpp is not None else None)


def sample_stream_oy(seed, params, index, key=()):
    """Stream of sample ``index``, keyed by (n, M) and ``key``."""
    return make_stream(seed, params.n, params.mesh, *key, index)


def _ensemble_block(params, seed, with_last_passage, key, start, stop):
    out = []
    for index in range(start, stop):
        log_z, lpp = stream_sample_oy(params, sample_stream_oy(seed, params, index, key), with_last_passage)
        normalized = normalize_oy_sample(log_z, params) if params.alpha is not None else None
        out.append(OYSample(index=index, log_z=log_z, params=params, seed=seed,
                            normalized=normalized, last_passage=lpp))
    return out


def ensemble_oy(params, count, seed, workers=1, with_last_passage=False, key=()):
    """``count`` samples; sample ``k`` uses stream ``(seed, n, M, *key, k)``."""
    if count < 1:
        raise ConfigError("count must be >= 1", field="count", value=count)
    t0 = time.time()
    report(f"🔄 OY ensemble n={params.n} t={params.t} beta={params.beta} M={params.mesh} x{count}")
    samples = map_blocks(partial(_ensemble_block, params, int(seed), with_last_passage,
                                 tuple(int(k) for k in key)), count, workers)
    report(f"✅ OY ensemble done in {time.time() - t0:.1f}s")
    return samples


def gue_largest_eigenvalues(n, count, stream):
    """Largest eigenvalue of n x n GUE matrices with density ~ exp(-tr H^2 / 2)."""
    x = stream.standard_normal((count, n, n))
    y = stream.standard_normal((count, n, n))
    real = (x + np.swapaxes(x, 1, 2)) / 2.0
    imag = (y - np.swapaxes(y, 1, 2)) / 2.0
    return np.linalg.eigvalsh(real + 1j * imag)[:, -1]


def samples_frame(samples):
    df = pd.DataFrame([s.to_row() for s in samples])
    cols = SAMPLE_COLUMNS + [c for c in df.columns if c not in SAMPLE_COLUMNS]
    return df[cols]
