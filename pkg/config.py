"""Configuration file for the divide-and-discard observer.

This module provides centralized configuration, including:
- Observer defaults (interval cap, Gauss-Seidel sweeps, bin counts)
- Benchmark defaults
- Named scenario presets for the standard experiments
- CSV schema settings
"""

import os
from typing import Any, Dict, List

# Rounding mode names
ROUNDING_FAST = "fast"
ROUNDING_RIGOROUS = "rigorous"

# Observer defaults
DEFAULT_I_MAX = 5
DEFAULT_K_SPLIT = 20
DEFAULT_K_PRUNE = 20
DEFAULT_ROUNDING = ROUNDING_FAST

# Default interval cap per benchmark (tuned values)
DEFAULT_M_MAX: Dict[str, int] = {
    "vdp": 251,
    "tank": 246,
}

# Van der Pol defaults
VDP_MU = 5.0
VDP_H = 0.025
VDP_X0_RADIUS = 1.0
VDP_W_RADIUS = 1e-3
VDP_V_RADIUS = 0.2

# Multi-tank defaults
TANK_N = 30
TANK_H = 0.5
TANK_G = 9.81
TANK_KAPPA = 0.015
TANK_X0_CENTER = 20.0
TANK_X0_RADIUS = 4.0
TANK_W_RADIUS = 1e-3
TANK_V_RADIUS = 0.2
TANK_INFLOW = 0.1  # constant inflow per input channel
TANK_LEVEL_FLOOR = 1e-6  # lower clamp for the 1/(2*sqrt(x)) Jacobian term

# 1-based tank indices of the 30-tank configuration
TANK30_INFLOW: List[int] = [1, 4, 5, 7, 9, 10, 13, 15, 16, 19, 21, 22, 25, 27, 28]
TANK30_MEASURED: List[int] = [
    2, 4, 5, 7, 8, 10, 11, 13, 14, 16, 17, 19, 20, 21, 22, 23, 25, 26, 27, 28, 29,
]

# Simulation horizon and seeds
DEFAULT_HORIZON = 100
DEFAULT_TRUTH_SEED = 0
DEFAULT_DIRECTION_SEED = 12345

# Mean-width metric: N = DIRECTIONS_PER_DIM * n random unit directions
DIRECTIONS_PER_DIM = 10

# CSV output
CSV_SCHEMA_VERSION = 1
CSV_SCHEMA_COMMENT = f"# dd-observer-csv v{CSV_SCHEMA_VERSION}"
RUN_CSV_COLUMNS: List[str] = [
    "scenario", "seed", "k", "M_k", "step_ms", "hullvol_term", "width_term", "sound",
]
AGGREGATE_CSV_COLUMNS: List[str] = ["v_tilde", "w_tilde", "mean_step_ms"]
SWEEP_CSV_COLUMNS: List[str] = ["scenario", "seed", "repeats", "M_max", *AGGREGATE_CSV_COLUMNS, "sound"]
COMPARE_CSV_COLUMNS: List[str] = [
    "scenario", "variant", "M_max", *AGGREGATE_CSV_COLUMNS, "v_hat", "w_hat", "sound",
]
# Wall-time columns; the only ones that differ between identical invocations
TIMING_COLUMNS: List[str] = ["step_ms", "mean_step_ms"]

# Named scenario presets. Values are partial ScenarioConfig payloads.
SCENARIO_PRESETS: Dict[str, Dict[str, Any]] = {
    "vdp-hard": {
        "id": "vdp-hard",
        "benchmark": "vdp",
        "vdp": {"mu": 5.0},
        "observer": {"M_max": 251},
    },
    "vdp-easy": {
        "id": "vdp-easy",
        "benchmark": "vdp",
        "vdp": {"mu": 0.1},
        "observer": {"M_max": 213},
    },
    "vdp-hard-high": {
        "id": "vdp-hard-high",
        "benchmark": "vdp",
        "vdp": {"mu": 5.0},
        "w_factor": 10.0,
        "v_factor": 5.0,
        "observer": {"M_max": 659},
    },
    "tank30": {
        "id": "tank30",
        "benchmark": "tank",
        "tank": {"n": 30},
        "observer": {"M_max": 246},
    },
    "tank30-high": {
        "id": "tank30-high",
        "benchmark": "tank",
        "tank": {"n": 30},
        "w_factor": 10.0,
        "v_factor": 5.0,
        "observer": {"M_max": 3},
    },
}


def get_log_level() -> str:
    """Get the log level.

    The DD_OBSERVER_LOG_LEVEL environment variable takes precedence over the
    INFO default.
    """
    return os.environ.get("DD_OBSERVER_LOG_LEVEL", "INFO").strip().upper() or "INFO"


def get_default_rounding() -> str:
    """Get the default rounding mode for new observer configurations.

    Checks DD_OBSERVER_ROUNDING first, then falls back to DEFAULT_ROUNDING.
    Unknown values fall back to the default.
    """
    env_rounding = os.environ.get("DD_OBSERVER_ROUNDING", "").strip().lower()
    if env_rounding in (ROUNDING_FAST, ROUNDING_RIGOROUS):
        return env_rounding
    return DEFAULT_ROUNDING


def get_preset(name: str) -> Dict[str, Any]:
    """Get a copy of a named scenario preset.

    Raises:
        KeyError: if the preset does not exist
    """
    import copy

    return copy.deepcopy(SCENARIO_PRESETS[name])
