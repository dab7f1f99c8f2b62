"""Experiment runner: INI configs, named checks, presets and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .presets import PRESETS, load_preset
from .runner import RunManifest, run

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "PRESETS", "load_preset",
           "RunManifest", "run"]
