"""Command-line interface for the policy choice laboratory."""

from .cli import main
from .config import RunConfig, load_config, resolve_run_config

__all__ = ["RunConfig", "load_config", "resolve_run_config", "main"]
