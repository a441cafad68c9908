"""
YAML run configuration for torus-holonomy commands.

This module loads the optional run configuration file and merges its
defaults and per-command sections over the built-in limits and tolerances.
"""

import copy
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from lib.errors import ConfigError

logger = logging.getLogger(__name__)

COMMANDS = ('classify', 'orbit', 'certify', 'transport', 'ball')


@dataclass(frozen=True)
class RunConfig:
    """Resolved limits and tolerances for one command."""

    tol: float = 1e-9
    max_size: int = 100000
    max_depth: int = 40
    seed: int = 0
    probes: int = 4096
    orth_tol: float = 1e-12
    cf_bound: int = 10 ** 6
    cf_tol: float = 1e-12
    plane_tol: float = 1e-8
    threads: Optional[int] = None
    output: Optional[str] = None

    def override(self, **values: Any) -> 'RunConfig':
        """Copy with every non-None value replaced; used for explicit CLI flags."""
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update({k: v for k, v in values.items() if v is not None})
        return RunConfig(**current)


class RunConfigParser:
    """Parse a run configuration with defaults."""

    DEFAULT_CONFIG = {f.name: f.default for f in fields(RunConfig)}

    POSITIVE_FLOATS = ('tol', 'orth_tol', 'cf_tol', 'plane_tol')
    POSITIVE_INTS = ('max_size', 'max_depth', 'probes', 'cf_bound')

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize the configuration parser.

        Args:
            config_path: Path to the YAML configuration file, or None for built-ins only

        Raises:
            FileNotFoundError: If the configuration file doesn't exist
            yaml.YAMLError: If the YAML file is invalid
        """
        self.config_path = config_path
        self.raw_config = self._load_yaml() if config_path is not None else {}
        self.defaults = self._parse_defaults()
        self.commands = self._parse_commands()

    def _load_yaml(self) -> Dict:
        """
        Load YAML configuration file.

        Raises:
            FileNotFoundError: If the configuration file doesn't exist
            yaml.YAMLError: If the YAML file is invalid
        """
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        with open(self.config_path, 'r') as f:
            try:
                config = yaml.safe_load(f)
                if config is None:
                    return {}
                return config
            except yaml.YAMLError as e:
                raise yaml.YAMLError(f"Invalid YAML in {self.config_path}: {e}")

    def _parse_defaults(self) -> Dict:
        """Merge user defaults with built-in defaults."""
        user_defaults = self.raw_config.get('defaults') or {}
        return {**self.DEFAULT_CONFIG, **user_defaults}

    def _parse_commands(self) -> Dict[str, Dict]:
        """Per-command sections with the merged defaults applied."""
        commands = {}
        for name in COMMANDS:
            section = (self.raw_config.get('commands') or {}).get(name) or {}
            commands[name] = {**copy.deepcopy(self.defaults), **section}
        return commands

    def get_run_config(self, command: str) -> RunConfig:
        """
        Resolved configuration for a command.

        Unknown keys are ignored here and reported by validate_config.

        Raises:
            ConfigError: If the command is unknown or one of its values is out of range
        """
        if command not in self.commands:
            raise ConfigError(f"unknown command: {command}")
        problems = [e for e in self.validate_config() if e.startswith(f"{command}: '")]
        if problems:
            raise ConfigError("; ".join(problems))
        section = self.commands[command]
        known = {k: v for k, v in section.items() if k in self.DEFAULT_CONFIG}
        return RunConfig(**known)

    def validate_config(self) -> List[str]:
        """
        Validate the configuration for common issues.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        for key in ('defaults', 'commands'):
            if key in self.raw_config and not isinstance(self.raw_config[key] or {}, dict):
                errors.append(f"'{key}' must be a mapping")
        for key in self.raw_config:
            if key not in ('defaults', 'commands'):
                errors.append(f"unknown top-level key '{key}'")
        for name in (self.raw_config.get('commands') or {}):
            if name not in COMMANDS:
                errors.append(f"unknown command section '{name}'")

        for name, section in self.commands.items():
            for key, value in section.items():
                if key not in self.DEFAULT_CONFIG:
                    errors.append(f"{name}: unknown key '{key}'")
                elif key in self.POSITIVE_FLOATS:
                    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
                        errors.append(f"{name}: '{key}' must be a positive number, got {value!r}")
                elif key in self.POSITIVE_INTS:
                    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                        errors.append(f"{name}: '{key}' must be a positive integer, got {value!r}")
                elif key == 'seed':
                    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                        errors.append(f"{name}: 'seed' must be a non-negative integer, got {value!r}")
                elif key == 'threads' and value is not None:
                    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                        errors.append(f"{name}: 'threads' must be a positive integer, got {value!r}")
                elif key == 'output' and value is not None and not isinstance(value, str):
                    errors.append(f"{name}: 'output' must be a string path")

        # dedupe: the same bad default shows up under every command
        return list(dict.fromkeys(errors))
