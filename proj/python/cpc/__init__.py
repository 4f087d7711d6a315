"""Centroidal preview control for multi-contact humanoid motion.

Scenarios are named either by a JSON file path or as ``builtin:<name>``.
"""

from ._cpc import (
    ConfigError,
    Error,
    InvalidArgument,
    dcm_equivalent_gains,
    preview_gains,
    run,
    run_to_csv,
    scenario_json,
    scenario_names,
    solve_nnls,
)

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "dcm_equivalent_gains",
    "preview_gains",
    "run",
    "run_to_csv",
    "scenario_json",
    "scenario_names",
    "solve_nnls",
]

__version__ = "0.1.0"
