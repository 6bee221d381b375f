"""Seeded, parallel reproduction harness writing one CSV per experiment."""

from .config import EXPERIMENTS, ExperimentConfig, default_config, load_config_file
from .experiments import (
    run_er_known_support,
    run_er_small_hist,
    run_experiment,
    run_roadnet,
    run_support_recovery,
    run_uav,
)
