"""Configuration management for the errorfloor toolkit."""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from errorfloor.constants import (CONFIG_PATH_ENV, CRITICAL_SIZE_CAP,
                                  DEFAULT_BATCH_SIZE, DEFAULT_CONFIG_FILE,
                                  DEFAULT_DEGREE_CAP, DEFAULT_MAX_BACKTRACKS,
                                  DEFAULT_MAX_ITERATIONS, DEFAULT_MIN_ERRORS,
                                  DEFAULT_TRAPPING_WINDOW, DELTA,
                                  ISA_RETRY_CAP, LOG_LEVEL_CONFIG_KEY,
                                  LOG_LEVEL_ENV, LP_BACKENDS, PCS_STEP_CAP,
                                  SCALE_CAP, TAU_STOP, TAU_SURF)
from errorfloor.logging_config import get_logger, timer


class Config:
    """Handles loading and accessing configuration from YAML files."""

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize config with optional custom path.

        Args:
            config_path: Custom path to config file. Defaults to the
                        ERRORFLOOR_CONFIG variable, then errorfloor.yaml
                        in current directory.
        """
        self.logger = get_logger(__name__)

        if config_path is None:
            env_path = os.getenv(CONFIG_PATH_ENV)
            config_path = (
                Path(env_path)
                if env_path
                else Path.cwd() / DEFAULT_CONFIG_FILE
            )

        self.config_path = config_path
        self._config_data: Dict[str, Any] = {}

        with timer(self.logger, "config file loading"):
            self._load_config()

    def _load_config(self) -> None:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            self._config_data = {}
            return

        try:
            with open(self.config_path, "r", encoding="utf-8") as file:
                data = yaml.safe_load(file) or {}
        except (yaml.YAMLError, IOError) as e:
            raise ValueError(
                f"Error loading config from {self.config_path}: {e}"
            )
        if not isinstance(data, dict):
            raise ValueError(
                f"Error loading config from {self.config_path}: "
                "top level must be a mapping"
            )
        self._config_data = data

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by key.

        Supports nested keys using dot notation (e.g., 'lp.backend').

        Args:
            key: Configuration key (supports dot notation)
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key.split(".")
        value = self._config_data

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def get_log_level(self) -> Optional[str]:
        """Log level from ERRORFLOOR_LOG, falling back to the config file."""
        env_value = os.getenv(LOG_LEVEL_ENV)
        if env_value:
            return env_value
        return self.get(LOG_LEVEL_CONFIG_KEY)

    def get_lp_backend(self) -> str:
        """Configured LP backend name."""
        backend = str(self.get("lp.backend", "simplex"))
        if backend not in LP_BACKENDS:
            raise ValueError(
                f"Error loading config from {self.config_path}: "
                f"unknown lp.backend '{backend}'"
            )
        return backend

    def get_decoder_defaults(self) -> Dict[str, int]:
        """Iteration count and trapping-set window for iterative decoders."""
        return {
            "max_iterations": int(
                self.get("decoder.max_iterations", DEFAULT_MAX_ITERATIONS)
            ),
            "trapping_window": int(
                self.get("decoder.trapping_window", DEFAULT_TRAPPING_WINDOW)
            ),
            "degree_cap": int(self.get("lp.degree_cap", DEFAULT_DEGREE_CAP)),
            "min_errors": int(self.get("fer.min_errors", DEFAULT_MIN_ERRORS)),
        }

    def get_search_defaults(self) -> Dict[str, float]:
        """Tolerances and caps of the instanton searches."""
        defaults = {
            "delta": DELTA,
            "tau_surf": TAU_SURF,
            "tau_stop": TAU_STOP,
            "scale_cap": SCALE_CAP,
            "pcs_step_cap": PCS_STEP_CAP,
            "retry_cap": ISA_RETRY_CAP,
            "critical_size_cap": CRITICAL_SIZE_CAP,
        }
        values = {}
        for key, default in defaults.items():
            raw = self.get(f"search.{key}", default)
            try:
                values[key] = type(default)(raw)
            except (TypeError, ValueError):
                raise ValueError(
                    f"Error loading config from {self.config_path}: "
                    f"search.{key} must be a number, got {raw!r}"
                )
        return values

    def get_fer_batch_size(self) -> int:
        """Frames per Monte-Carlo batch."""
        return int(self.get("fer.batch_size", DEFAULT_BATCH_SIZE))

    def get_max_backtracks(self) -> int:
        """Backtrack cap of code construction."""
        return int(
            self.get("construct.max_backtracks", DEFAULT_MAX_BACKTRACKS)
        )

    def as_dict(self) -> Dict[str, Any]:
        """Copy of the loaded configuration."""
        return dict(self._config_data)

    def has_config_file(self) -> bool:
        """Check if config file exists."""
        return self.config_path.exists()

    def get_config_path(self) -> Path:
        """Get the path to the config file."""
        return self.config_path
