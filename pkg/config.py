"""
Configuration module for hyperlab.
Handles environment variables, key-value run files, validation, and default settings.
"""
import os
import logging
from typing import Dict, Any, Optional

from dotenv import dotenv_values, load_dotenv

logger = logging.getLogger(__name__)

# Default configuration values
DEFAULTS = {
    # Quadrature
    'QUADRATURE_NODES': 512,
    'QUADRATURE_TOLERANCE': 1e-4,
    # Simulation
    'CHOLESKY_JITTER': 1e-12,
    'MAX_PATH_POINTS': 4096,
    'MAX_FIELD_POINTS_PER_AXIS': 64,
    'MAX_ANALYSIS_POINTS_PER_AXIS': 32,
    # GRR engine
    'B_FLOOR_EPSILON': 1e-12,
    # Monte Carlo verdicts
    'MC_STANDARD_ERRORS': 4.0,
    'HOLDER_AGREEMENT_TOLERANCE': 0.1,
    'HOLDER_ALPHA_TOLERANCE': 0.07,
    'EXP_MOMENT_DOUBLING_TOLERANCE': 0.10,
    'EXP_MOMENT_TRIM_TOLERANCE': 0.25,
    'EXP_MOMENT_TRIM_FRACTION': 0.01,
    'EXP_MOMENT_MIN_SAMPLES': 1000,
    # Execution
    'MC_WORKERS': 1,
    'SHOW_PROGRESS': True,
    'LOG_LEVEL': 'INFO',
}


class Config:
    """Configuration class for hyperlab."""

    def __init__(self):
        self.quadrature_nodes = self._get_int('QUADRATURE_NODES')
        self.quadrature_tolerance = self._get_float('QUADRATURE_TOLERANCE')
        self.cholesky_jitter = self._get_float('CHOLESKY_JITTER')
        self.max_path_points = self._get_int('MAX_PATH_POINTS')
        self.max_field_points_per_axis = self._get_int('MAX_FIELD_POINTS_PER_AXIS')
        self.max_analysis_points_per_axis = self._get_int('MAX_ANALYSIS_POINTS_PER_AXIS')
        self.b_floor_epsilon = self._get_float('B_FLOOR_EPSILON')
        self.mc_standard_errors = self._get_float('MC_STANDARD_ERRORS')
        self.holder_agreement_tolerance = self._get_float('HOLDER_AGREEMENT_TOLERANCE')
        self.holder_alpha_tolerance = self._get_float('HOLDER_ALPHA_TOLERANCE')
        self.exp_moment_doubling_tolerance = self._get_float('EXP_MOMENT_DOUBLING_TOLERANCE')
        self.exp_moment_trim_tolerance = self._get_float('EXP_MOMENT_TRIM_TOLERANCE')
        self.exp_moment_trim_fraction = self._get_float('EXP_MOMENT_TRIM_FRACTION')
        self.exp_moment_min_samples = self._get_int('EXP_MOMENT_MIN_SAMPLES')
        self.mc_workers = self._get_int('MC_WORKERS')
        self.show_progress = self._get_bool('SHOW_PROGRESS')
        self.log_level = self._get_str('LOG_LEVEL').upper()

        self._validate()

    def _get_str(self, key: str, default_key: str = None) -> str:
        """Get string value from environment or defaults."""
        default = DEFAULTS.get(default_key or key, '')
        return os.getenv(key, default)

    def _get_int(self, key: str) -> int:
        """Get integer value from environment or defaults."""
        value = os.getenv(key, str(DEFAULTS[key]))
        try:
            return int(value)
        except ValueError:
            logger.warning(f"Invalid {key}: {value}, using default: {DEFAULTS[key]}")
            return DEFAULTS[key]

    def _get_float(self, key: str) -> float:
        """Get float value from environment or defaults."""
        value = os.getenv(key, str(DEFAULTS[key]))
        try:
            return float(value)
        except ValueError:
            logger.warning(f"Invalid {key}: {value}, using default: {DEFAULTS[key]}")
            return DEFAULTS[key]

    def _get_bool(self, key: str) -> bool:
        """Get boolean value from environment or defaults."""
        value = os.getenv(key, str(DEFAULTS[key]))
        if isinstance(value, bool):
            return value
        return str(value).lower() in ('true', '1', 'yes', 'on')

    def _validate(self):
        """Validate configuration values."""
        issues = []

        if self.quadrature_nodes < 16:
            issues.append("QUADRATURE_NODES must be at least 16")

        if not (0 < self.quadrature_tolerance < 1):
            issues.append("QUADRATURE_TOLERANCE must be between 0 and 1")

        if not (0 <= self.cholesky_jitter < 1e-3):
            issues.append("CHOLESKY_JITTER must be in [0, 1e-3)")

        if self.max_path_points < 2:
            issues.append("MAX_PATH_POINTS must be at least 2")

        if self.max_field_points_per_axis < 2 or self.max_analysis_points_per_axis < 2:
            issues.append("Field grid caps must be at least 2 points per axis")

        if not (0 < self.b_floor_epsilon < 1e-3):
            issues.append("B_FLOOR_EPSILON must be in (0, 1e-3)")

        if self.mc_standard_errors <= 0:
            issues.append("MC_STANDARD_ERRORS must be positive")

        if self.holder_agreement_tolerance <= 0 or self.holder_alpha_tolerance <= 0:
            issues.append("Hoelder tolerances must be positive")

        if not (0 < self.exp_moment_trim_fraction < 0.5):
            issues.append("EXP_MOMENT_TRIM_FRACTION must be in (0, 0.5)")

        if self.exp_moment_min_samples < 2:
            issues.append("EXP_MOMENT_MIN_SAMPLES must be at least 2")

        if self.mc_workers < 1:
            issues.append("MC_WORKERS must be at least 1")

        if self.log_level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            issues.append("LOG_LEVEL must be a standard logging level name")

        if issues:
            for issue in issues:
                logger.error(f"Configuration error: {issue}")
            raise ValueError("Configuration validation failed")

        logger.debug("Configuration validation passed")

    def as_dict(self) -> Dict[str, Any]:
        """Return the effective settings keyed by their environment names."""
        return {key: getattr(self, key.lower()) for key in DEFAULTS}


def load_environment(dotenv_path: Optional[str] = None, override: bool = False) -> bool:
    """
    Export the settings of a .env file (default: searched upwards from the
    package directory) into the environment read by Config.
    """
    loaded = load_dotenv(dotenv_path, override=override)
    if loaded:
        logger.debug(f"Loaded environment from {dotenv_path or '.env'}")
    return loaded


def load_key_value_file(path: str) -> Dict[str, Optional[str]]:
    """
    Load a ``key=value`` run file (a run manifest is a valid run file).

    Keys are normalised to lower case so files may use either spelling.
    Comment lines starting with ``#`` are ignored.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Run configuration file not found: {path}")

    values = dotenv_values(path)
    loaded = {key.strip().lower(): value for key, value in values.items() if key}
    logger.info(f"Loaded {len(loaded)} settings from {path}")
    return loaded


# Create global config instance
load_environment()
config = Config()
