"""
Configuration module for the equical package.
Handles loading settings from environment variables or defaults.
"""

import os
import logging

from equical.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

LR_CONVENTIONS = ("conditional", "incremental", "marginal")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, str(default))
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, repr(default))
    try:
        value = float(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be a number, got {raw!r}")
    if not value > 0:
        raise ConfigurationError(f"{name} must be positive, got {value}")
    return value


def get_config():
    """
    Load and return the configuration for equical.

    Returns:
        dict: Configuration dictionary

    Raises:
        ConfigurationError: If an environment variable holds an invalid value
    """
    # Simulation configuration
    threads = _env_int("EQUICAL_THREADS", 1)
    seed = _env_int("EQUICAL_SEED", 20240101, minimum=0)
    accrual_months = _env_float("EQUICAL_ACCRUAL_MONTHS", 24.0)

    # Group sequential grid configuration
    grid_nodes = _env_int("EQUICAL_GRID_NODES", 256, minimum=16)
    grid_tol = _env_float("EQUICAL_GRID_TOL", 1e-7)

    lr_convention = os.getenv("EQUICAL_LR_CONVENTION", "conditional").lower()
    if lr_convention not in LR_CONVENTIONS:
        raise ConfigurationError(
            f"EQUICAL_LR_CONVENTION must be one of {LR_CONVENTIONS}, got {lr_convention!r}"
        )

    log_level = os.getenv("EQUICAL_LOG_LEVEL", "WARNING").upper()
    if log_level not in LOG_LEVELS:
        raise ConfigurationError(f"EQUICAL_LOG_LEVEL must be one of {LOG_LEVELS}, got {log_level!r}")

    config = {
        "simulation": {
            "threads": threads,
            "seed": seed,
            "accrual_months": accrual_months,
        },
        "grid": {
            "nodes": grid_nodes,
            "tol": grid_tol,
        },
        "odds": {
            "lr_convention": lr_convention,
        },
        "logging": {
            "level": log_level,
        },
    }

    logger.info(f"Loaded configuration with {threads} simulation worker(s), seed {seed}")
    logger.info(f"Group sequential grid: {grid_nodes} nodes, tolerance {grid_tol:g}")

    return config
