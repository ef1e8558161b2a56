"""Experiment configuration, Monte Carlo runs, reports and the CLI."""
from .config import FULL_SCALE, SCHEMES, ExperimentConfig, build_config, read_config_file
from .experiment import TrialRecord, run_experiment, run_trial, selected_ccm, trial_seed
from .report import COLUMNS, emit_report, render
from .selftest import DEFAULT_TOLERANCES, run_selftest
