"""
Experiment runner (实验运行器).

Every experiment returns an ``Outcome``; ``run`` writes it to
``<output_dir>/<experiment>/<config-hash>/`` as samples.csv (when the
experiment has per-sample data), summary.csv and meta.json. CSVs are
written through a ``.partial`` file and renamed, so a failed run never
replaces completed output.
"""

import json
import math
import os
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache

import numpy as np
import pandas as pd

from .. import __version__
from .. import coupling, lattice, semidiscrete
from ..ensemble_stats import (
    SUMMARY_COLUMNS,
    bootstrap_moments,
    dkw_threshold,
    exponent_fit,
    ks_distance,
    load_tw_reference,
    summary_row,
    tw_reference_from_table,
    two_sample_ks,
)
from ..fredholm import kernels, tracy_widom
from ..utils.common_utils import (
    config_hash,
    ensure_dir,
    file_sha256,
    make_stream,
    report,
    save_json,
    save_table,
)
from ..utils.errors import AcceptanceError
from .config import UNHASHED, warn_regime

GUE_STREAM = 0x4755_4500
Z_975 = 1.959963984540054

# acceptance thresholds
KS_CEILING = 0.10
EXPONENT_TOLERANCE = 0.08
LLN_BAND = (0.85, 1.15)
ORACLE_TOL = 1e-8
IDENTITY_TOL = 1e-6
CROSSOVER_TOL = 1e-5
MC_STANDARD_ERRORS = 3.0
ENVELOPE_FRACTION = 0.99
LPP_KS_GAP = 0.03
MESH_BIAS_ALLOWANCE = 0.02
MONOTONE_SLACK = 1e-9

# steepest-descent probe of G at the critical point
G_PROBE_T = (1e2, 1e3, 1e4)
G_PROBE_BETA = 2.0
G_SLOPE_TOL = 0.1


@dataclass
class Outcome:
    summary: pd.DataFrame
    samples: pd.DataFrame = None
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass
class RunResult:
    config: object
    run_dir: str
    files: dict
    outcome: Outcome
    meta: dict

    @property
    def failed_checks(self):
        return [name for name, ok in self.outcome.checks.items() if not ok]


class StageTimer:
    def __init__(self):
        self.stages = {}

    @contextmanager
    def stage(self, name):
        t0 = time.time()
        try:
            yield
        finally:
            self.stages[name] = round(self.stages.get(name, 0.0) + time.time() - t0, 3)


def run_directory(config):
    return os.path.join(config.output_dir, config.experiment, config.config_hash)


def plan(config):
    """The resolved plan printed by ``--dry-run``."""
    run_dir = run_directory(config)
    names = ["summary.csv", "meta.json"]
    if config.experiment not in ("tw_table", "crossover_check", "modulus_check"):
        names.insert(0, "samples.csv")
    return {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "config_hash": config.config_hash,
        "run_dir": run_dir,
        "outputs": [os.path.join(run_dir, n) for n in names],
    }


# --------------------------------------------------------------------------
# shared pieces


@lru_cache(maxsize=4)
def _computed_reference(low, high, step):
    return tw_reference_from_table(tracy_widom.tw_table(tracy_widom.default_grid(low, high, step)))


def tw_reference(config):
    """F2 as a callable, from ``config.tw_reference`` or computed in-process."""
    if config.tw_reference:
        return load_tw_reference(config.tw_reference)
    report("🔄 no tw_reference given; tabulating F2 on [-10, 6]")
    return _computed_reference(tracy_widom.TABLE_LOW, tracy_widom.TABLE_HIGH, 0.04)


def _non_increasing(values, slack=MONOTONE_SLACK):
    return coupling.non_increasing(values, slack)


def _fit_or_none(pairs):
    pairs = [(x, y) for x, y in pairs if y > 0]
    if len({x for x, _ in pairs}) < 3:
        return None
    return exponent_fit(pairs)


def _ordered(df, leading):
    return df[[c for c in leading if c in df.columns] + [c for c in df.columns if c not in leading]]


# --------------------------------------------------------------------------
# experiments


def universality_discrete(config, timer):
    warn_regime(config)
    F = tw_reference(config)
    rows, frames, fits, checks = [], [], {}, {}
    target = 0.5 - config.alpha / 6.0
    for family_index, spec in enumerate(config.weight_specs()):
        family_rows = []
        for N in config.N_list:
            params = lattice.LatticeParams.from_alpha(N, config.alpha, config.beta)
            with timer.stage(f"{spec.family}/N={N}"):
                samples = lattice.ensemble(params, spec, config.count, config.seed, config.workers,
                                           with_last_passage=config.with_last_passage, key=(family_index,))
            df = lattice.samples_frame(samples)
            if config.include_log_beta_shift:
                df["normalized"] = [lattice.normalize_free_energy(z, params, True) for z in df["log_z"]]
            row = summary_row(N, params.n, df["normalized"].to_numpy(), F, config.bootstrap, config.seed)
            row.update(family=spec.family, alpha=config.alpha, beta=config.beta,
                       sd_raw=float(df["log_z"].std(ddof=1)) if len(df) > 1 else math.nan)
            if config.with_last_passage:
                gap = df["log_z"] / config.beta - df["last_passage"]
                bound = lattice.log_path_count(N, params.n) / config.beta
                row["sandwich_ok"] = bool(gap.min() >= -MONOTONE_SLACK and gap.max() <= bound + MONOTONE_SLACK)
                checks[f"{spec.family}/N={N}/sandwich"] = row["sandwich_ok"]
            family_rows.append(row)
            frames.append(df)
            report(f"✅ {spec.family} N={N}: KS={row['ks']:.4f} sd={row['sd']:.4f}")
        ks = [r["ks"] for r in family_rows]
        checks[f"{spec.family}/ks_non_increasing"] = _non_increasing(ks)
        checks[f"{spec.family}/ks_ceiling"] = ks[-1] <= KS_CEILING
        fit = _fit_or_none([(r["N"], r["sd_raw"]) for r in family_rows])
        if fit is not None:
            fits[spec.family] = fit.to_dict()
            checks[f"{spec.family}/sd_exponent"] = abs(fit.slope - target) <= EXPONENT_TOLERANCE
        rows.extend(family_rows)
    summary = _ordered(pd.DataFrame(rows), SUMMARY_COLUMNS + ["family"])
    return Outcome(summary=summary, samples=pd.concat(frames, ignore_index=True), checks=checks,
                   extra={"sd_exponent_target": target, "fits": fits})


def universality_oy(config, timer):
    F = tw_reference(config)
    mu = semidiscrete.oy_exponents(config.alpha)[1]
    rows, frames, meshes, checks = [], [], {}, {}
    for t_index, t in enumerate(config.t_list):
        n = lattice.rows_for(t, config.alpha)
        with timer.stage(f"mesh/t={t:g}"):
            mesh = config.mesh or semidiscrete.choose_mesh(n, t, config.beta, config.alpha, config.seed).mesh
        meshes[f"{t:g}"] = mesh
        params = semidiscrete.OYParams(n=n, t=float(t), beta=config.beta, mesh=mesh, alpha=config.alpha)
        with timer.stage(f"t={t:g}"):
            samples = semidiscrete.ensemble_oy(params, config.count, config.seed, config.workers, key=(t_index,))
        df = semidiscrete.samples_frame(samples)
        row = summary_row(t, n, df["normalized"].to_numpy(), F, config.bootstrap, config.seed)
        row.update(t=t, mesh=mesh, beta=config.beta, alpha=config.alpha,
                   sd_raw=float(df["log_z"].std(ddof=1)) if len(df) > 1 else math.nan)
        rows.append(row)
        frames.append(df)
        report(f"✅ OY t={t:g} n={n} M={mesh}: KS={row['ks']:.4f}")
    checks["ks_non_increasing"] = _non_increasing([r["ks"] for r in rows])
    fit = _fit_or_none([(r["t"], r["sd_raw"]) for r in rows])
    extra = {"meshes": meshes, "sd_exponent_target": mu}
    if fit is not None:
        extra["fit"] = fit.to_dict()
        checks["sd_exponent"] = abs(fit.slope - mu) <= EXPONENT_TOLERANCE
    summary = _ordered(pd.DataFrame(rows), SUMMARY_COLUMNS + ["t"])
    return Outcome(summary=summary, samples=pd.concat(frames, ignore_index=True), checks=checks, extra=extra)


def coupling_gap(config, timer):
    summaries, samples, checks = [], [], {}
    for family_index, spec in enumerate(config.weight_specs()):
        with timer.stage(spec.family):
            summary, sample_df = coupling.coupling_gap_experiment(
                spec, config.alpha, config.N_list, config.beta, config.count, config.seed,
                steps_per_unit=config.steps_per_unit, workers=config.workers, key=(family_index,))
        sample_df.insert(0, "family", spec.family)
        summaries.append(summary)
        samples.append(sample_df)
        checks[f"{spec.family}/gap1_non_increasing"] = _non_increasing(summary["gap1_median"])
        checks[f"{spec.family}/gap2_non_increasing"] = _non_increasing(summary["gap2_median"])
        checks[f"{spec.family}/envelope"] = bool((summary["envelope_fraction"] >= ENVELOPE_FRACTION).all())
    summary = _ordered(pd.concat(summaries, ignore_index=True), coupling.GAP_COLUMNS)
    return Outcome(summary=summary, samples=pd.concat(samples, ignore_index=True), checks=checks)


def lln(config, timer):
    spec = config.weight_specs()[0]
    rows, frames = [], []
    for N in config.N_list:
        params = lattice.LatticeParams.from_alpha(N, config.alpha, config.beta)
        with timer.stage(f"N={N}"):
            samples = lattice.ensemble(params, spec, config.count, config.seed, config.workers)
        df = lattice.samples_frame(samples)
        ratio = np.array([lattice.lln_ratio(z, params) for z in df["log_z"]])
        df["lln_ratio"] = ratio
        rows.append({
            "N": N,
            "n": params.n,
            "count": len(df),
            "family": spec.family,
            "median_ratio": float(np.median(ratio)),
            "mean_ratio": float(np.mean(ratio)),
            "q10": float(np.quantile(ratio, 0.1)),
            "q90": float(np.quantile(ratio, 0.9)),
        })
        frames.append(df)
    medians = [r["median_ratio"] for r in rows]
    checks = {"band": LLN_BAND[0] <= medians[-1] <= LLN_BAND[1]}
    if len(medians) >= 2:
        checks["closer_to_one"] = abs(medians[-1] - 1.0) < abs(medians[-2] - 1.0)
    return Outcome(summary=pd.DataFrame(rows), samples=pd.concat(frames, ignore_index=True), checks=checks)


def laplace_check(config, timer):
    rows, frames, checks = [], [], {}
    with timer.stage("oracle"):
        for u in config.oracle_u_list:
            det = kernels.laplace_oy(1, config.tau, u=u)
            oracle = kernels.laplace_oracle_single(config.tau, u)
            diff = abs(det.real - oracle)
            rows.append({"kind": "oracle_n1", "n": 1, "tau": config.tau, "u": u, "fredholm": det.real,
                         "reference": oracle, "abs_diff": diff, "tolerance": ORACLE_TOL,
                         "nodes": det.nodes})
            checks[f"oracle/u={u:g}"] = diff <= ORACLE_TOL
    with timer.stage("rescaled_identity"):
        # n = t^alpha at t = 16, alpha = 1/2; each side converges on its own contour and s-line
        direct = kernels.laplace_oy(4, 16.0, log_u=-16.0)
        rescaled = kernels.laplace_rescaled(4, 16.0, 0.5, 1.0, 0.0, delta_tilde=0.8)
        diff = abs(direct.value - rescaled.value)
        rows.append({"kind": "rescaled_identity", "n": 4, "tau": 16.0, "u": math.exp(-16.0),
                     "fredholm": direct.real, "reference": rescaled.real, "abs_diff": diff,
                     "tolerance": IDENTITY_TOL, "nodes": direct.nodes})
        checks["rescaled_identity"] = diff <= IDENTITY_TOL
    meshes = {}
    for n in config.n_list:
        with timer.stage(f"mesh/n={n}"):
            # the mesh is converged on E[exp(-u Z)] itself, to within the run's own MC error
            mesh = config.mesh or semidiscrete.choose_mesh_laplace(n, config.tau, config.u_list, config.count,
                                                                    seed=config.seed).mesh
        meshes[str(n)] = mesh
        with timer.stage(f"monte_carlo/n={n}"):
            params = semidiscrete.OYParams(n=n, t=config.tau, beta=1.0, mesh=mesh)
            samples = semidiscrete.ensemble_oy(params, config.count, config.seed, config.workers)
        df = semidiscrete.samples_frame(samples)
        z = np.exp(df["log_z"].to_numpy())
        for u in config.u_list:
            det = kernels.laplace_oy(n, config.tau, u=u)
            values = np.exp(-u * z)
            mean = float(values.mean())
            if values.size >= 30:
                ci = bootstrap_moments(values, B=config.bootstrap, seed=config.seed, statistics=("mean",))["mean"]
                se = (ci.high - ci.low) / (2.0 * Z_975)
            else:
                se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.inf
            diff = abs(det.real - mean)
            rows.append({"kind": "monte_carlo", "n": n, "tau": config.tau, "u": u, "fredholm": det.real,
                         "reference": mean, "abs_diff": diff, "tolerance": MC_STANDARD_ERRORS * se,
                         "nodes": det.nodes, "mesh": mesh, "se": se})
            checks[f"monte_carlo/n={n}/u={u:g}"] = diff <= MC_STANDARD_ERRORS * se
        frames.append(df)
    samples = pd.concat(frames, ignore_index=True) if frames else None
    return Outcome(summary=pd.DataFrame(rows), samples=samples, checks=checks, extra={"meshes": meshes})


def tw_table(config, timer):
    with timer.stage("table"):
        df = tracy_widom.tw_table(tracy_widom.default_grid(config.r_low, config.r_high, config.r_step))
    with timer.stage("moments"):
        moments = tracy_widom.tw_moments()
    f = df["F2"].to_numpy()
    checks = {"monotone": bool(np.all(np.diff(f) >= -MONOTONE_SLACK))}
    return Outcome(summary=df, checks=checks, extra={"moments": moments})


def _g_probe(alpha):
    v, residual = kernels.critical_point(G_PROBE_BETA)
    kappa = kernels.exponents(alpha)[0]
    rows = []
    for t in G_PROBE_T:
        g1, _, g3 = kernels.g_derivatives(v, t, alpha, G_PROBE_BETA)
        rows.append({"kind": "steepest_descent", "t": t, "beta": G_PROBE_BETA, "alpha": alpha,
                     "g1": float(np.real(g1)), "g1_scaled": float(abs(g1) * t ** kappa),
                     "g3_gap": float(abs(np.real(g3) + 2.0 * G_PROBE_BETA ** 3)), "residual": residual})
    return rows, -kappa


def crossover_check(config, timer):
    rows, checks = [], {}
    with timer.stage("crossover"):
        for beta in config.beta_list:
            for r in config.r_list:
                value = kernels.f_gue_via_crossover(r, beta)
                airy_route = tracy_widom.tracy_widom_gue(r / beta)
                diff = abs(value - airy_route)
                rows.append({"kind": "two_routes", "r": r, "beta": beta, "crossover": value,
                             "airy_route": airy_route, "abs_diff": diff})
                checks[f"two_routes/beta={beta:g}/r={r:g}"] = diff <= CROSSOVER_TOL
        pair = (kernels.f_gue_via_crossover(1.0, 1.0), kernels.f_gue_via_crossover(2.0, 2.0))
        rows.append({"kind": "beta_scaling", "r": 2.0, "beta": 2.0, "crossover": pair[1],
                     "airy_route": pair[0], "abs_diff": abs(pair[0] - pair[1])})
        checks["beta_scaling"] = abs(pair[0] - pair[1]) <= CROSSOVER_TOL
    with timer.stage("steepest_descent"):
        probe, slope_target = _g_probe(config.alpha)
        rows.extend(probe)
        fit = exponent_fit([(p["t"], abs(p["g1"])) for p in probe])
        checks["g1_rate"] = abs(fit.slope - slope_target) <= G_SLOPE_TOL
        checks["g3_limit"] = _non_increasing([p["g3_gap"] for p in probe])
    return Outcome(summary=pd.DataFrame(rows), checks=checks,
                   extra={"g1_fit": fit.to_dict(), "g1_slope_target": slope_target})


def lpp_limit(config, timer):
    F = tw_reference(config)
    spec = config.weight_specs()[0]
    rows, frames, checks = [], [], {}
    for N in config.N_list:
        n = lattice.rows_for(N, config.alpha)
        bound_unit = lattice.log_path_count(N, n)
        gaps = {}
        for beta in config.beta_list:
            params = lattice.LatticeParams(N=N, n=n, beta=beta, alpha=config.alpha)
            with timer.stage(f"N={N}/beta={beta:g}"):
                samples = lattice.ensemble(params, spec, config.count, config.seed, config.workers,
                                           with_last_passage=True)
            df = lattice.samples_frame(samples)
            gap = df["log_z"] / beta - df["last_passage"]
            lpp_norm = np.array([lattice.normalize_last_passage(L, N, n) for L in df["last_passage"]])
            gaps[beta] = float(gap.max())
            row = {
                "N": N,
                "n": n,
                "beta": beta,
                "count": len(df),
                "max_gap": float(gap.max()),
                "min_gap": float(gap.min()),
                "bound": bound_unit / beta,
                "ks_polymer": ks_distance(df["normalized"].to_numpy(), F),
                "ks_lpp": ks_distance(lpp_norm, F),
            }
            rows.append(row)
            checks[f"N={N}/beta={beta:g}/sandwich"] = (row["min_gap"] >= -MONOTONE_SLACK
                                                       and row["max_gap"] <= row["bound"] + MONOTONE_SLACK)
            frames.append(df)
        betas = sorted(gaps)
        for a, b in zip(betas, betas[1:]):
            if math.isclose(b, 2.0 * a):
                checks[f"N={N}/halving/{a:g}->{b:g}"] = gaps[b] <= gaps[a] / 2.0 + MONOTONE_SLACK
    last = [r for r in rows if r["N"] == config.N_list[-1] and r["beta"] == max(config.beta_list)][0]
    checks["zero_temperature_ks"] = abs(last["ks_lpp"] - last["ks_polymer"]) <= LPP_KS_GAP
    return Outcome(summary=pd.DataFrame(rows), samples=pd.concat(frames, ignore_index=True), checks=checks)


def gue_fixed_n(config, timer):
    rows, frames, checks = [], [], {}
    for t_index, t in enumerate(config.t_list):
        for n in config.n_list:
            mesh = config.mesh or semidiscrete.default_mesh(n, t, 1.0)
            params = semidiscrete.OYParams(n=n, t=float(t), beta=1.0, mesh=mesh)
            with timer.stage(f"t={t:g}/n={n}"):
                samples = semidiscrete.ensemble_oy(params, config.count, config.seed, config.workers,
                                                   with_last_passage=True, key=(t_index,))
                lpp = np.array([s.last_passage for s in samples]) / math.sqrt(t)
                gue = semidiscrete.gue_largest_eigenvalues(n, config.count, make_stream(config.seed, GUE_STREAM, n))
            stat, pvalue = two_sample_ks(lpp, gue)
            threshold = dkw_threshold(config.count / 2.0)
            rows.append({"n": n, "t": t, "mesh": mesh, "count": config.count, "ks": stat, "pvalue": pvalue,
                         "threshold": threshold, "lpp_mean": float(lpp.mean()), "gue_mean": float(gue.mean())})
            checks[f"t={t:g}/n={n}"] = stat <= threshold + MESH_BIAS_ALLOWANCE
            frames.append(pd.DataFrame({"index": np.arange(config.count), "n": n, "t": t,
                                        "lpp_scaled": lpp, "gue_max_eigenvalue": gue}))
    return Outcome(summary=pd.DataFrame(rows), samples=pd.concat(frames, ignore_index=True), checks=checks)


def modulus_check(config, timer):
    rows = []
    with timer.stage("simulation"):
        for i, r in enumerate(config.r_list):
            for j, x in enumerate(config.x_list):
                est = coupling.modulus_check(config.t_max, r, x, config.count, make_stream(config.seed, i, j),
                                             steps=config.steps_per_unit)
                rows.append({"r": r, "x": x, "probability": est.probability, "count": est.count})
    table = pd.DataFrame(rows)
    k1 = coupling.fit_modulus_constants(table)
    table["bound"] = [k1 / r * math.exp(-0.5 * x ** 2 / r) for r, x in zip(table["r"], table["x"])]
    checks = {"envelope": bool((table["probability"] <= table["bound"] + MONOTONE_SLACK).all())}
    for r, group in table.groupby("r", sort=True):
        checks[f"r={r:g}/decreasing_in_x"] = _non_increasing(group.sort_values("x")["probability"], 0.01)
    return Outcome(summary=table, checks=checks, extra={"K1": k1, "K2": 0.5})


EXPERIMENT_FUNCS = {
    "universality_discrete": universality_discrete,
    "universality_oy": universality_oy,
    "coupling_gap": coupling_gap,
    "lln": lln,
    "laplace_check": laplace_check,
    "tw_table": tw_table,
    "crossover_check": crossover_check,
    "lpp_limit": lpp_limit,
    "gue_fixed_n": gue_fixed_n,
    "modulus_check": modulus_check,
}


# --------------------------------------------------------------------------
# persistence


def _timestamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(config, check=False):
    """
    Run ``config``, persist its artifacts and return a ``RunResult``.

    With ``check`` a failed acceptance check raises ``AcceptanceError``
    after everything has been written.
    """
    run_dir = ensure_dir(run_directory(config))
    started = _timestamp()
    t0 = time.time()
    timer = StageTimer()
    report(f"🔄 {config.experiment} -> {run_dir}")
    outcome = EXPERIMENT_FUNCS[config.experiment](config, timer)

    files = {}
    if outcome.samples is not None:
        files["samples.csv"] = save_table(outcome.samples, os.path.join(run_dir, "samples.csv"), "samples")
    files["summary.csv"] = save_table(outcome.summary, os.path.join(run_dir, "summary.csv"), "summary")
    meta = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "config_hash": config.config_hash,
        "version": __version__,
        "started": started,
        "wall_clock_seconds": round(time.time() - t0, 3),
        "stages": timer.stages,
        "checks": outcome.checks,
        "files": {name: file_sha256(path) for name, path in files.items()},
        "extra": outcome.extra,
        "completed": True,
    }
    save_json(meta, os.path.join(run_dir, "meta.json"))
    result = RunResult(config=config, run_dir=run_dir, files=files, outcome=outcome, meta=meta)

    failed = result.failed_checks
    passed = len(outcome.checks) - len(failed)
    report(f"{'✅' if not failed else '⚠️'} {config.experiment}: {passed}/{len(outcome.checks)} checks passed")
    if config.stdout:
        outcome.summary.to_csv(sys.stdout, index=False, float_format="%.17g", lineterminator="\n")
    if check and failed:
        raise AcceptanceError("acceptance checks failed", failed=failed, run_dir=run_dir)
    return result


def write_error(config, error):
    """Drop ``error.json`` into the run directory when it exists."""
    if config is None:
        return None
    run_dir = run_directory(config)
    if not os.path.isdir(run_dir):
        return None
    return save_json(error.to_dict(), os.path.join(run_dir, "error.json"))


def verify(root):
    """
    Re-check every meta.json under ``root``: the config hash recomputed
    from the echoed config must match both meta.json and the directory
    name, and every listed file must still have its recorded SHA-256.
    Returns a list of problem descriptions.
    """
    problems = []
    checked = 0
    for dirpath, _, filenames in sorted(os.walk(root)):
        if "meta.json" not in filenames:
            continue
        checked += 1
        meta_path = os.path.join(dirpath, "meta.json")
        try:
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
        except (OSError, ValueError) as exc:
            problems.append(f"{meta_path}: unreadable ({exc})")
            continue
        payload = {k: v for k, v in meta.get("config", {}).items() if k not in UNHASHED}
        recomputed = config_hash(payload)
        if recomputed != meta.get("config_hash"):
            problems.append(f"{meta_path}: config hash {meta.get('config_hash')} != recomputed {recomputed}")
        if os.path.basename(dirpath) != meta.get("config_hash"):
            problems.append(f"{dirpath}: directory name does not match config hash")
        for name, digest in meta.get("files", {}).items():
            path = os.path.join(dirpath, name)
            if not os.path.exists(path):
                problems.append(f"{path}: missing")
            elif file_sha256(path) != digest:
                problems.append(f"{path}: SHA-256 mismatch")
    report(f"{'✅' if not problems else '❌'} verified {checked} run(s), {len(problems)} problem(s)")
    return problems
