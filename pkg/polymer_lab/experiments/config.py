"""
Experiment configuration (实验配置).

A config is a JSON object; the command line overrides file values, and the
defaults of the chosen experiment fill the rest. The resolved config is
frozen and hashed: the hash leaves out ``workers``, ``output_dir`` and
``stdout`` because they never change numeric output.
"""

import json
from dataclasses import asdict, dataclass, fields, replace

from .. import weights as wts
from ..utils.common_utils import config_hash, report
from ..utils.errors import ConfigError

EXPERIMENTS = (
    "universality_discrete",
    "universality_oy",
    "coupling_gap",
    "lln",
    "laplace_check",
    "tw_table",
    "crossover_check",
    "lpp_limit",
    "gue_fixed_n",
    "modulus_check",
)

SUBCOMMANDS = {
    "simulate-discrete": "universality_discrete",
    "simulate-oy": "universality_oy",
    "coupling-gap": "coupling_gap",
    "lln": "lln",
    "laplace-check": "laplace_check",
    "tw-table": "tw_table",
    "crossover-check": "crossover_check",
    "lpp-limit": "lpp_limit",
    "gue-fixed-n": "gue_fixed_n",
    "modulus-check": "modulus_check",
}

UNHASHED = ("workers", "output_dir", "stdout")
MAX_SEED = 2 ** 64 - 1

# Fluctuation regimes for the lattice experiment (reported, never enforced)
PROVEN_ALPHA = 3.0 / 14.0
ALL_MOMENTS_ALPHA = 3.0 / 7.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    workers: int = 1
    output_dir: str = "results"
    stdout: bool = False
    count: int = 100
    alpha: float = 0.2
    beta: float = 1.0
    N_list: tuple = ()
    t_list: tuple = ()
    n_list: tuple = ()
    beta_list: tuple = ()
    families: tuple = ("gaussian",)
    mesh: int = None
    tau: float = 1.0
    u_list: tuple = ()
    oracle_u_list: tuple = ()
    r_list: tuple = ()
    x_list: tuple = ()
    r_low: float = -10.0
    r_high: float = 6.0
    r_step: float = 0.04
    t_max: float = 1.0
    steps_per_unit: int = 1000
    include_log_beta_shift: bool = False
    with_last_passage: bool = False
    tw_reference: str = None
    bootstrap: int = 2000

    def to_dict(self):
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    def hash_payload(self):
        return {k: v for k, v in self.to_dict().items() if k not in UNHASHED}

    @property
    def config_hash(self):
        return config_hash(self.hash_payload())

    def weight_specs(self):
        return [_weight_spec(f) for f in self.families]


DEFAULTS = {
    "universality_discrete": {"N_list": (500, 2000, 8000), "count": 4000,
                              "families": ("gaussian", "rademacher", "uniform")},
    "universality_oy": {"t_list": (50.0, 200.0, 800.0), "count": 1000},
    "coupling_gap": {"N_list": (500, 2000, 8000), "count": 500, "families": ("rademacher",)},
    "lln": {"N_list": (10_000, 100_000), "count": 50},
    "laplace_check": {"n_list": (3,), "tau": 1.0, "u_list": (0.5, 1.0), "oracle_u_list": (0.1, 1.0, 10.0),
                      "count": 100_000},
    "tw_table": {},
    "crossover_check": {"r_list": (-2.0, -1.0, 0.0, 1.0), "beta_list": (1.0, 2.0)},
    "lpp_limit": {"N_list": (500, 2000, 8000), "beta_list": (1.0, 2.0, 4.0, 8.0), "count": 1000},
    "gue_fixed_n": {"n_list": (2, 3, 4), "t_list": (1.0,), "count": 2000, "mesh": 4096},
    "modulus_check": {"r_list": (0.01, 0.05, 0.1, 0.3), "x_list": (0.1, 0.3, 0.5, 1.0), "count": 10_000},
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _weight_spec(entry):
    try:
        return wts.from_json(entry)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid weight family: {exc}", field="families", value=entry) from exc


def _coerce(name, value):
    kind = _FIELD_TYPES[name]
    if value is None:
        return None
    try:
        if kind is tuple:
            if not isinstance(value, (list, tuple)):
                raise TypeError("expected a list")
            if name == "families":
                return tuple(value)
            if name in ("N_list", "n_list"):
                return tuple(_as_int(v) for v in value)
            return tuple(float(v) for v in value)
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError("expected true/false")
            return value
        if kind is int:
            return _as_int(value)
        if kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{name}': {exc}", field=name, value=value) from exc


def _as_int(value):
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def parse_json(text, source="<config>"):
    """Parse config JSON; syntax errors report line and column."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                          source=source, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{source}: config must be a JSON object", source=source)
    return payload


def load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_json(fh.read(), source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", source=path) from exc


def resolve(experiment=None, file_payload=None, overrides=None):
    """
    defaults(experiment) <- file values <- command-line overrides.

    ``experiment`` may come from the subcommand or from the file.
    """
    file_payload = dict(file_payload or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    name = experiment or file_payload.get("experiment")
    if file_payload.get("experiment") not in (None, name):
        raise ConfigError("config file names a different experiment", field="experiment",
                          value=file_payload["experiment"], expected=name)
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}", field="experiment", value=name)
    merged = dict(DEFAULTS[name])
    for source in (file_payload, overrides):
        for key, value in source.items():
            if key == "experiment":
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config field '{key}'", field=key)
            merged[key] = _coerce(key, value)
    config = ExperimentConfig(experiment=name, **merged)
    validate(config)
    return config


def _positive(config, name):
    value = getattr(config, name)
    if not value > 0:
        raise ConfigError(f"{name} must be > 0", field=name, value=value)


def validate(config):
    if not 0 <= config.seed <= MAX_SEED:
        raise ConfigError("seed must be an unsigned 64-bit integer", field="seed", value=config.seed)
    if config.workers < 1:
        raise ConfigError("workers must be >= 1", field="workers", value=config.workers)
    if config.count < 1:
        raise ConfigError("count must be >= 1", field="count", value=config.count)
    if not 0 < config.alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)", field="alpha", value=config.alpha)
    for name in ("beta", "tau", "t_max", "r_step", "steps_per_unit", "bootstrap"):
        _positive(config, name)
    if config.r_high <= config.r_low:
        raise ConfigError("r_high must exceed r_low", field="r_high", value=config.r_high)
    for name in ("N_list", "n_list"):
        if any(v < 1 for v in getattr(config, name)):
            raise ConfigError(f"{name} entries must be >= 1", field=name, value=list(getattr(config, name)))
    for name in ("t_list", "beta_list", "u_list", "oracle_u_list", "x_list"):
        if any(not v > 0 for v in getattr(config, name)):
            raise ConfigError(f"{name} entries must be > 0", field=name, value=list(getattr(config, name)))
    if config.mesh is not None and config.mesh < 1:
        raise ConfigError("mesh must be >= 1", field="mesh", value=config.mesh)
    if not config.families:
        raise ConfigError("at least one weight family is required", field="families")
    config.weight_specs()
    _require_lists(config)
    return config


_REQUIRED_LISTS = {
    "universality_discrete": ("N_list",),
    "universality_oy": ("t_list",),
    "coupling_gap": ("N_list",),
    "lln": ("N_list",),
    "laplace_check": ("n_list",),
    "crossover_check": ("r_list", "beta_list"),
    "lpp_limit": ("N_list", "beta_list"),
    "gue_fixed_n": ("n_list", "t_list"),
    "modulus_check": ("r_list", "x_list"),
}


def _require_lists(config):
    for name in _REQUIRED_LISTS.get(config.experiment, ()):
        if not getattr(config, name):
            raise ConfigError(f"{config.experiment} needs a non-empty {name}", field=name)
    if config.experiment == "modulus_check" and any(not 0 < r < config.t_max for r in config.r_list):
        raise ConfigError("modulus r values must lie in (0, t_max)", field="r_list", value=list(config.r_list))


def regime_note(alpha):
    """Which fluctuation regime alpha falls in for the lattice experiment."""
    if alpha < PROVEN_ALPHA:
        return "proven"
    if alpha < ALL_MOMENTS_ALPHA:
        return "all-moments"
    return "conjectural"


def warn_regime(config):
    if config.experiment != "universality_discrete":
        return
    note = regime_note(config.alpha)
    if note == "all-moments":
        report(f"⚠️ alpha={config.alpha} >= 3/14: covered only for weights with all moments finite")
    elif note == "conjectural":
        report(f"⚠️ alpha={config.alpha} >= 3/7: outside every proven regime")


def with_overrides(config, **changes):
    new = replace(config, **changes)
    validate(new)
    return new
