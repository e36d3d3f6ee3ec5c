"""Config-driven experiment runner behind the ``gkdv`` command."""

from .cli import main, run, sweep, verify
from .config import ConfigError, ExperimentConfig, default_config, load_config, parse_config_text

__all__ = ["main", "run", "sweep", "verify", "ConfigError", "ExperimentConfig", "default_config", "load_config",
           "parse_config_text"]
