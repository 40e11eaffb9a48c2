"""Monte-Carlo experiment harness and command-line front end."""

from .config import ExperimentConfig, load_config
from .experiments import (
    NullSummary,
    PhaseRow,
    RocPoint,
    null_distribution,
    phase_sweep,
    roc_curve,
    run_trial,
    simulate_statistics,
)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "NullSummary",
    "PhaseRow",
    "RocPoint",
    "null_distribution",
    "phase_sweep",
    "roc_curve",
    "run_trial",
    "simulate_statistics",
]
