"""Experiment harness: configs, data plumbing, training, grids, CLI."""

from .config import (
    DataError,
    ExperimentConfig,
    NumericError,
    default_aug_flags,
    load_config,
    parse_config_file,
)
from .data import SplitData, chunk, eval_windows, load_split, mono_select, n_chunks
from .grid import GRID_NAMES, grid_cells, parse_results, report, run_grid
from .train import RunRecord, evaluate_split, overfit_probe, train_run

__all__ = [
    "DataError",
    "ExperimentConfig",
    "GRID_NAMES",
    "NumericError",
    "RunRecord",
    "SplitData",
    "chunk",
    "default_aug_flags",
    "eval_windows",
    "evaluate_split",
    "grid_cells",
    "load_config",
    "load_split",
    "mono_select",
    "n_chunks",
    "overfit_probe",
    "parse_config_file",
    "parse_results",
    "report",
    "run_grid",
    "train_run",
]
