"""Experiment configuration, orchestration and file output."""
from .config import ExperimentConfig, load_config
from .experiments import (
    EvolveResult, run_evolve, run_ground, run_sweep_coupling, run_sweep_n, run_wigner, simulate,
)

__all__ = [
    "ExperimentConfig", "load_config", "EvolveResult", "simulate",
    "run_evolve", "run_sweep_coupling", "run_sweep_n", "run_ground", "run_wigner",
]
