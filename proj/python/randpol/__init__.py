"""Randomized-feature policy iteration for continuous MDPs."""

from ._randpol import (
    ConfigError,
    Env,
    FeatureSet,
    Policy,
    QFunction,
    RiccatiDivergence,
    RunResult,
    SolverFailure,
    Unsupported,
    __version__,
    linear_quadratic,
    median_heuristic_bandwidth,
    oracles,
    performance_error,
    resolved_config,
    run,
    run_experiment,
    sample_features,
    solve_box_least_squares,
    synthetic_1d,
    theory,
)

__all__ = [
    "ConfigError",
    "Env",
    "FeatureSet",
    "Policy",
    "QFunction",
    "RiccatiDivergence",
    "RunResult",
    "SolverFailure",
    "Unsupported",
    "__version__",
    "linear_quadratic",
    "median_heuristic_bandwidth",
    "oracles",
    "performance_error",
    "resolved_config",
    "run",
    "run_experiment",
    "sample_features",
    "solve_box_least_squares",
    "synthetic_1d",
    "theory",
]
