"""
Weight distributions for the discrete polymer.

A ``WeightSpec`` names a raw family plus an affine map ``(x - location) /
scale`` applied at sample time. ``standardize`` picks the map that makes the
weights exactly mean 0 and variance 1, which is all the discrete polymer
needs: a non-zero mean only multiplies Z by a deterministic constant and a
different variance is a rescaling of beta.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .utils.errors import ConfigError, DegenerateDistributionError

FAMILIES = (
    "gaussian",
    "rademacher",
    "uniform",
    "shifted_exponential",
    "finite_discrete",
    "student_t",
)

_DEFAULT_PARAMS = {
    "gaussian": (("mean", 0.0), ("sd", 1.0)),
    "rademacher": (),
    "uniform": (("low", 0.0), ("high", 1.0)),
    "shifted_exponential": (("rate", 1.0),),
    "finite_discrete": (),
    "student_t": (("dof", 5.0),),
}

PROB_TOL = 1e-12


@dataclass(frozen=True)
class WeightSpec:
    """
    Raw family, its parameters and the sample-time affine map.

    ``params`` is a tuple of ``(name, value)`` pairs; ``atoms`` holds the
    ``(value, probability)`` pairs of a finite_discrete law.
    """

    family: str
    params: tuple = ()
    atoms: tuple = ()
    location: float = 0.0
    scale: float = 1.0

    def param(self, name):
        for key, value in self.params:
            if key == name:
                return float(value)
        for key, value in _DEFAULT_PARAMS[self.family]:
            if key == name:
                return float(value)
        raise KeyError(f"{self.family} has no parameter {name!r}")

    @property
    def name(self):
        return self.family


@dataclass(frozen=True)
class RawMoments:
    mean: float
    variance: float
    third: float
    fourth: float


def make_spec(family, atoms=(), **params):
    """Build and validate a raw (not yet standardized) spec."""
    if family not in FAMILIES:
        raise ConfigError(f"unknown weight family {family!r}", field="family", allowed=list(FAMILIES))
    known = {k for k, _ in _DEFAULT_PARAMS[family]}
    unknown = set(params) - known
    if unknown:
        raise ConfigError(f"{family} does not take {sorted(unknown)}", field="params")
    ordered = tuple((k, float(params[k])) for k, _ in _DEFAULT_PARAMS[family] if k in params)
    atoms = tuple((float(v), float(p)) for v, p in atoms)
    spec = WeightSpec(family=family, params=ordered, atoms=atoms)
    _validate(spec)
    return spec


def gaussian(mean=0.0, sd=1.0):
    return make_spec("gaussian", mean=mean, sd=sd)


def rademacher():
    return make_spec("rademacher")


def uniform(low=0.0, high=1.0):
    return make_spec("uniform", low=low, high=high)


def shifted_exponential(rate=1.0):
    return make_spec("shifted_exponential", rate=rate)


def finite_discrete(values, probs):
    if len(values) != len(probs):
        raise ConfigError("finite_discrete needs one probability per value", field="atoms")
    return make_spec("finite_discrete", atoms=tuple(zip(values, probs)))


def student_t(dof):
    return make_spec("student_t", dof=dof)


def from_name(name):
    """Standardized spec for a bare family name (the config shorthand)."""
    builders = {
        "gaussian": gaussian,
        "rademacher": rademacher,
        "uniform": uniform,
        "shifted_exponential": shifted_exponential,
    }
    if name not in builders:
        raise ConfigError(
            f"family {name!r} needs explicit parameters; use the JSON form",
            field="family",
        )
    return standardize(builders[name]())


def _validate(spec):
    if spec.family == "finite_discrete":
        if not spec.atoms:
            raise ConfigError("finite_discrete needs at least one atom", field="atoms")
        probs = np.array([p for _, p in spec.atoms])
        if np.any(probs < 0):
            raise ConfigError("finite_discrete probabilities must be >= 0", field="atoms")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise ConfigError(
                "finite_discrete probabilities must sum to 1",
                field="atoms",
                total=math.fsum(probs),
            )
    elif spec.family == "uniform" and spec.param("high") < spec.param("low"):
        raise ConfigError("uniform needs low <= high", field="params")
    elif spec.family == "shifted_exponential" and spec.param("rate") <= 0:
        raise ConfigError("shifted_exponential needs rate > 0", field="params")
    elif spec.family == "student_t" and spec.param("dof") <= 0:
        raise ConfigError("student_t needs dof > 0", field="params")
    if not (spec.scale > 0 and math.isfinite(spec.scale)):
        raise ConfigError("scale must be positive and finite", field="scale")


def raw_moments(spec):
    """Mean, variance and third/fourth central moments of the raw family."""
    fam = spec.family
    if fam == "gaussian":
        m, s = spec.param("mean"), spec.param("sd")
        return RawMoments(m, s * s, 0.0, 3.0 * s ** 4)
    if fam == "rademacher":
        return RawMoments(0.0, 1.0, 0.0, 1.0)
    if fam == "uniform":
        a, b = spec.param("low"), spec.param("high")
        w = b - a
        return RawMoments(0.5 * (a + b), w * w / 12.0, 0.0, w ** 4 / 80.0)
    if fam == "shifted_exponential":
        lam = spec.param("rate")
        return RawMoments(1.0 / lam, 1.0 / lam ** 2, 2.0 / lam ** 3, 9.0 / lam ** 4)
    if fam == "student_t":
        nu = spec.param("dof")
        mean = 0.0 if nu > 1 else math.nan
        var = nu / (nu - 2.0) if nu > 2 else math.inf
        third = 0.0 if nu > 3 else math.nan
        fourth = 3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0)) if nu > 4 else math.inf
        return RawMoments(mean, var, third, fourth)
    values = np.array([v for v, _ in spec.atoms])
    probs = np.array([p for _, p in spec.atoms])
    mean = math.fsum(values * probs)
    centred = values - mean
    return RawMoments(
        mean,
        math.fsum(centred ** 2 * probs),
        math.fsum(centred ** 3 * probs),
        math.fsum(centred ** 4 * probs),
    )


def standardize(spec):
    """Return the spec with location/scale giving exact mean 0, variance 1."""
    mom = raw_moments(spec)
    if not (math.isfinite(mom.mean) and math.isfinite(mom.variance)):
        raise DegenerateDistributionError(
            f"{spec.family} has no finite mean/variance", family=spec.family
        )
    if mom.variance <= 0:
        raise DegenerateDistributionError(
            f"{spec.family} has zero variance", family=spec.family
        )
    return replace(spec, location=mom.mean, scale=math.sqrt(mom.variance))


def exact_moments(spec, k):
    """k-th central moment (k <= 4) of the mapped variable, in closed form."""
    if k < 0 or k > 4 or int(k) != k:
        raise ValueError(f"central moments are supported for k = 0..4, got {k}")
    k = int(k)
    if k == 0:
        return 1.0
    if k == 1:
        return 0.0
    mom = raw_moments(spec)
    central = {2: mom.variance, 3: mom.third, 4: mom.fourth}[k]
    if not math.isfinite(central):
        raise ValueError(f"{spec.family} has no finite moment of order {k}")
    return central / spec.scale ** k


def is_standardized(spec, tol=1e-12):
    mom = raw_moments(spec)
    return (
        abs((mom.mean - spec.location) / spec.scale) <= tol
        and abs(mom.variance / spec.scale ** 2 - 1.0) <= tol
    )


def sample(spec, stream, count):
    """
    i.i.d. draws of ``(X - location) / scale``.

    Only sequential draws (``random``, ``standard_normal``,
    ``standard_exponential``, ``standard_t``) are used, so drawing in chunks
    gives the same sequence as drawing everything at once.
    """
    count = int(count)
    if count == 0:
        return np.empty(0)
    fam = spec.family
    if fam == "gaussian":
        raw = spec.param("mean") + spec.param("sd") * stream.standard_normal(count)
    elif fam == "rademacher":
        raw = np.where(stream.random(count) < 0.5, -1.0, 1.0)
    elif fam == "uniform":
        a, b = spec.param("low"), spec.param("high")
        raw = a + (b - a) * stream.random(count)
    elif fam == "shifted_exponential":
        raw = stream.standard_exponential(count) / spec.param("rate")
    elif fam == "student_t":
        raw = stream.standard_t(spec.param("dof"), count)
    else:
        values = np.array([v for v, _ in spec.atoms])
        cum = np.cumsum([p for _, p in spec.atoms])
        idx = np.searchsorted(cum, stream.random(count) * cum[-1], side="right")
        raw = values[np.minimum(idx, len(values) - 1)]
    return (raw - spec.location) / spec.scale


def discrete_atoms(spec):
    """Mapped ``(values, probs)`` for the atomic families, else ``None``."""
    if spec.family == "rademacher":
        values, probs = np.array([-1.0, 1.0]), np.array([0.5, 0.5])
    elif spec.family == "finite_discrete":
        values = np.array([v for v, _ in spec.atoms])
        probs = np.array([p for _, p in spec.atoms])
        order = np.argsort(values)
        values, probs = values[order], probs[order]
    else:
        return None
    return (values - spec.location) / spec.scale, probs


def distribution(spec):
    """Frozen ``scipy.stats`` law of the mapped variable (continuous families)."""
    loc, sc = spec.location, spec.scale
    fam = spec.family
    if fam == "gaussian":
        return stats.norm(loc=(spec.param("mean") - loc) / sc, scale=spec.param("sd") / sc)
    if fam == "uniform":
        a, b = spec.param("low"), spec.param("high")
        return stats.uniform(loc=(a - loc) / sc, scale=(b - a) / sc)
    if fam == "shifted_exponential":
        return stats.expon(loc=-loc / sc, scale=1.0 / (spec.param("rate") * sc))
    if fam == "student_t":
        return stats.t(spec.param("dof"), loc=-loc / sc, scale=1.0 / sc)
    return None


def cdf(spec, x):
    """CDF of the mapped variable, continuous or atomic."""
    dist = distribution(spec)
    if dist is not None:
        return dist.cdf(x)
    values, probs = discrete_atoms(spec)
    cum = np.cumsum(probs)
    idx = np.searchsorted(values, np.asarray(x, dtype=float), side="right")
    return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)


def to_json(spec):
    payload = {
        "family": spec.family,
        "params": {k: v for k, v in spec.params},
        "location": spec.location,
        "scale": spec.scale,
    }
    if spec.atoms:
        payload["atoms"] = [[v, p] for v, p in spec.atoms]
    return payload


def from_json(payload):
    """Inverse of ``to_json``. A bare string is a standardized family name."""
    if isinstance(payload, str):
        return from_name(payload)
    if not isinstance(payload, dict) or "family" not in payload:
        raise ConfigError("weight spec must be a family name or an object with 'family'", field="family")
    spec = make_spec(
        payload["family"],
        atoms=tuple(tuple(a) for a in payload.get("atoms", ())),
        **payload.get("params", {}),
    )
    if "location" in payload or "scale" in payload:
        spec = replace(
            spec,
            location=float(payload.get("location", 0.0)),
            scale=float(payload.get("scale", 1.0)),
        )
        _validate(spec)
        return spec
    return standardize(spec)
