"""
Command line for the polymer lab.

    python -m polymer_lab <subcommand> [--config FILE] [--seed S] [--workers K]
                          [--out DIR] [--stdout] [--dry-run] [--quiet] [--check]
    python -m polymer_lab verify [DIR]

Exit codes: 0 success, 2 config error, 3 numeric-convergence failure,
4 acceptance-threshold failure, 1 any other failure during a run.
"""

import argparse
import json
import sys

from ..utils.common_utils import canonical_json, report, set_quiet
from ..utils.errors import AcceptanceError, ConfigError, PolymerLabError
from . import config as cfg
from . import runner


def _key_value(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _common(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="experiment seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, help="worker processes (never changes output)")
    parser.add_argument("--out", dest="output_dir", help="output root directory")
    parser.add_argument("--count", type=int, help="samples per ensemble")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--set", dest="assignments", type=_key_value, action="append", default=[],
                        metavar="KEY=JSON", help="override any config field")
    parser.add_argument("--stdout", action="store_true", default=None, help="also print summary CSV to stdout")
    parser.add_argument("--dry-run", action="store_true", help="print the resolved plan and exit")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines")
    parser.add_argument("--check", action="store_true", help="exit 4 when an acceptance check fails")


def build_parser():
    parser = argparse.ArgumentParser(prog="polymer_lab", description="Directed-polymer experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in cfg.SUBCOMMANDS.items():
        _common(sub.add_parser(name, help=experiment.replace("_", " ")))
    verify = sub.add_parser("verify", help="re-check config hashes and file digests")
    verify.add_argument("root", nargs="?", default="results")
    verify.add_argument("--quiet", action="store_true")
    return parser


def resolve_args(args):
    """ExperimentConfig from parsed arguments: defaults <- file <- flags."""
    file_payload = cfg.load_file(args.config) if args.config else {}
    overrides = dict(args.assignments)
    for key in ("seed", "workers", "output_dir", "count", "alpha", "beta", "stdout"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return cfg.resolve(cfg.SUBCOMMANDS[args.command], file_payload, overrides)


def _emit_error(error, config=None):
    payload = error.to_dict()
    print(canonical_json(payload), file=sys.stderr, flush=True)
    runner.write_error(config, error)
    return error.exit_code


def main(argv=None):
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    if args.command == "verify":
        problems = runner.verify(args.root)
        if problems:
            for p in problems:
                report(f"❌ {p}", force=True)
            return _emit_error(AcceptanceError("verification failed", problems=problems))
        return 0

    try:
        config = resolve_args(args)
        if args.dry_run:
            print(json.dumps(runner.plan(config), indent=2, sort_keys=True))
            return 0
    except PolymerLabError as exc:
        return _emit_error(exc)
    except FileNotFoundError as exc:
        return _emit_error(ConfigError(str(exc), path=exc.filename))
    except ValueError as exc:
        return _emit_error(ConfigError(str(exc)))

    try:
        runner.run(config, check=args.check)
    except PolymerLabError as exc:
        return _emit_error(exc, config)
    except Exception as exc:
        return _emit_error(PolymerLabError(str(exc), type=type(exc).__name__), config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
