"""Experiment configs, the runner and the command line."""

from .config import EXPERIMENTS, SUBCOMMANDS, ExperimentConfig, resolve
from .runner import plan, run, verify
