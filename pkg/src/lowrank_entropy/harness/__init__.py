"""Experiment harness: configuration, experiments, exports and the CLI."""
from .config import ExperimentConfig, load_config
from .experiments import (build_pipeline, l1_to_oracle, run_audit, run_classical_convergence,
                          run_convergence, run_timing, solve_grid)

__all__ = ["ExperimentConfig", "load_config", "build_pipeline", "l1_to_oracle", "run_audit",
           "run_classical_convergence", "run_convergence", "run_timing", "solve_grid"]
