"""
Configuration service for budgets, worker counts and per-module parameters.
"""
import os
import json
import sys
import copy
from typing import Dict, Any, Optional

# Ensure project root is in path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Local imports
from utils.logger import get_logger
from services.error_handler import ConfigurationError

logger = get_logger(__name__)

WORKERS_ENV = "KERNEL_VERIFY_WORKERS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "budgets": {
        "enumeration": 100_000_000,
        "qmc_log2_points": 14,
        "qmc_estimates": 8,
        "max_terms": 200_000,
    },
    "parallel": {
        "workers": 1,
    },
    "seed": 20240611,
    "delta": {
        "w_center": 2.5,
        "w_radius": 1.5,
        "q_values": [30, 60, 120],
        "q_convergence": [40, 80, 160],
        "m_max": 5000,
        "s_places": "inf,2",
    },
    "local": {
        "primes": [3, 5, 7],
        "t_exps": [1, 2],
        "extra_cases": [[3, 3]],
        "cases": 50,
        "zeta_primes": [3, 5],
        "zeta_cases": 2,
        "oracle_primes": [3],
        "oracle_order": 2,
        "fibered_order": 3,
        "closed_form_order": 6,
    },
    "decay": {
        "eps": 0.5,
        "n_test": 6,
        "t_grid": [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625],
        "large_gamma_t": 0.25,
        "lambdas": [2.0, 4.0, 8.0, 16.0, 32.0],
        "b": [1.0, 1.0],
        "gamma0": [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]],
        "test_function": {"diag": [[1.5, 2.5], [-2.5, -1.5]], "off": [[-0.5, 0.5], [-0.5, 0.5]]},
        "poisson_q": [10, 40],
        "poisson_k_max": 3,
    },
    "hecke": {
        "primes": [2, 3],
        "q_values": [2, 3],
        "grid_side": 100,
    },
    "sigma": {
        "x_values": [50, 100],
        "trunc_gamma": 1,
        "trunc_c": 3,
        "trunc_e": 5,
        "tail_safety": 3.0,
        "qmc_log2_points": 12,
        "params": None,
        "test_function": None,
    },
    "reports": {
        "directory": "reports",
    },
}


class ConfigService:
    """Service for managing engine configuration and settings."""

    def __init__(self, config_file: str = "config.json"):
        """Initialize the configuration service with a config file path."""
        self.config_file = config_file
        self.config: Dict[str, Any] = {}
        self._load_config()
        logger.info(f"ConfigService initialized with file: {config_file}")

    def _load_config(self) -> None:
        """Load configuration from file or create with defaults if it doesn't exist."""
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                self.config = _merge(copy.deepcopy(DEFAULT_CONFIG), loaded)
                logger.info("Configuration loaded from file")
            else:
                self._create_default_config()
                logger.info("Created default configuration")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{self.config_file} is not valid JSON: {e}") from e
        except OSError as e:
            logger.error(f"Error loading configuration: {e}")
            self.config = copy.deepcopy(DEFAULT_CONFIG)

    def _create_default_config(self) -> None:
        """Create default configuration settings."""
        self.config = copy.deepcopy(DEFAULT_CONFIG)
        self._save_config()

    def _save_config(self) -> None:
        """Save configuration to file."""
        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=4)
            logger.info("Configuration saved to file")
        except OSError as e:
            logger.error(f"Error saving configuration: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by dotted key with optional default."""
        value = self.config
        try:
            for k in key.split('.'):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> None:
        """Set a configuration value by dotted key."""
        keys = key.split('.')
        config = self.config
        for k in keys[:-1]:
            if k not in config or not isinstance(config[k], dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value
        self._save_config()
        logger.info(f"Configuration updated: {key} = {value}")

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """Merge a parameter file into the loaded configuration without saving."""
        if not isinstance(overrides, dict):
            raise ConfigurationError("Parameter overrides must be a JSON object")
        self.config = _merge(self.config, overrides)
        logger.info(f"Applied {len(overrides)} configuration override section(s)")

    def get_workers(self, override: Optional[int] = None) -> int:
        """Resolve the worker count: explicit value, then environment, then file."""
        if override is not None:
            workers = override
        elif os.environ.get(WORKERS_ENV):
            try:
                workers = int(os.environ[WORKERS_ENV])
            except ValueError as e:
                raise ConfigurationError(f"{WORKERS_ENV} must be an integer") from e
        else:
            workers = int(self.get("parallel.workers", 1))
        if workers < 1:
            raise ConfigurationError(f"Worker count must be positive, got {workers}")
        return workers

    def snapshot(self) -> Dict[str, Any]:
        """Deep copy of the active configuration for report echoing."""
        return copy.deepcopy(self.config)


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = _merge(base[key], value)
        else:
            base[key] = value
    return base
