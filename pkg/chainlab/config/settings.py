"""
Settings for chainlab.
These are configurable parameters that can be changed by the user.
"""

import os
import json
import logging
from typing import Dict, Any, Optional

from .constants import (
    DEFAULT_TOL_ROW, DEFAULT_TOL_SPAN, DEFAULT_TOL_CLUSTER, DEFAULT_TOL_MONOTONIC,
    DEFAULT_TOL_DOUBLY, MAX_CERTIFICATE_ORDER, MAX_FLOW_ORDER, DEFAULT_TAU_ABS,
    DEFAULT_TAU_TAIL, DEFAULT_FLOW_THETA, DEFAULT_FLOW_SIGMA, DEFAULT_HORIZON,
    DEFAULT_CLUSTER_WINDOW,
)

logger = logging.getLogger("chainlab.settings")


class Settings:
    """
    Application settings that can be loaded from and saved to a configuration file.
    Uses a singleton pattern to ensure only one settings instance exists.
    """
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Settings, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._settings = self._defaults()

        self._config_dir = self._get_config_dir()
        self._config_file = os.path.join(self._config_dir, "settings.json")
        self._load_settings()

        self._initialized = True

    @staticmethod
    def _defaults() -> Dict[str, Any]:
        return {
            # Tolerances
            "tol_row": DEFAULT_TOL_ROW,
            "tol_span": DEFAULT_TOL_SPAN,
            "tol_cluster": DEFAULT_TOL_CLUSTER,
            "tol_monotonic": DEFAULT_TOL_MONOTONIC,
            "tol_doubly": DEFAULT_TOL_DOUBLY,

            # Enumeration budgets
            "max_certificate_order": MAX_CERTIFICATE_ORDER,
            "max_flow_order": MAX_FLOW_ORDER,

            # Divergence heuristics
            "flow_tau_abs": DEFAULT_TAU_ABS,
            "flow_tau_tail": DEFAULT_TAU_TAIL,
            "flow_theta": DEFAULT_FLOW_THETA,
            "flow_sigma": DEFAULT_FLOW_SIGMA,

            # Runs
            "default_horizon": DEFAULT_HORIZON,
            "cluster_window": DEFAULT_CLUSTER_WINDOW,
            "output_directory": "chainlab-out",
            "log_level": "INFO",
        }

    @staticmethod
    def _get_config_dir() -> str:
        """Get the configuration directory for the application"""
        if os.name == 'nt':  # Windows
            return os.path.join(os.environ.get('APPDATA', ''), 'chainlab')
        return os.path.join(os.path.expanduser("~"), '.config', 'chainlab')

    def _load_settings(self) -> None:
        """Load settings from the configuration file"""
        try:
            if os.path.exists(self._config_file):
                with open(self._config_file, 'r') as f:
                    loaded_settings = json.load(f)
                    self._settings.update(loaded_settings)
                logger.info(f"Settings loaded from {self._config_file}")
            else:
                logger.debug("No settings file found, using defaults")
        except Exception as e:
            logger.error(f"Error loading settings: {e}")

    def save_settings(self) -> bool:
        """Save current settings to the configuration file"""
        try:
            os.makedirs(self._config_dir, exist_ok=True)
            with open(self._config_file, 'w') as f:
                json.dump(self._settings, f, indent=4, sort_keys=True)
            logger.info(f"Settings saved to {self._config_file}")
            return True
        except Exception as e:
            logger.error(f"Error saving settings: {e}")
            return False

    def get(self, key: str, default: Any = None) -> Any:
        """Get a setting value by key"""
        return self._settings.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set a setting value by key"""
        self._settings[key] = value

    def get_all(self) -> Dict[str, Any]:
        """Get all settings as a dictionary"""
        return self._settings.copy()

    def tolerance(self, name: str, override: Optional[float] = None) -> float:
        """
        Resolve a tolerance, preferring an explicit override.

        Args:
            name: Tolerance name without the ``tol_`` prefix (``row``, ``span``, ...)
            override: Value supplied by a manifest or CLI flag

        Returns:
            float: The tolerance to use
        """
        if override is not None:
            return float(override)
        return float(self._settings[f"tol_{name}"])

    def reset_to_defaults(self) -> None:
        """Reset all settings to their default values"""
        self._settings = self._defaults()
        logger.info("Settings reset to defaults")


# Create a global settings instance
settings = Settings()
