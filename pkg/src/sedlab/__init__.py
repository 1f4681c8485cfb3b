"""sedlab: a desk-scale laboratory for polyphonic sound event detection.

Synthesizes multichannel scenes (first-order ambisonics and a tetrahedral
mic array), extracts normalized log-mel features, augments spectrograms,
trains a small from-scratch CRNN with BCE/Dice objectives, and evaluates
with segment-based metrics — all in plain numpy.
"""

__version__ = "0.1.0"

from . import augment, features, losses, metrics, nn, scene
from .harness import ExperimentConfig, train_run
from .labels import LabelGrid, events_to_grid, read_label_csv, write_label_csv

__all__ = [
    "ExperimentConfig",
    "LabelGrid",
    "augment",
    "events_to_grid",
    "features",
    "losses",
    "metrics",
    "nn",
    "read_label_csv",
    "scene",
    "train_run",
    "write_label_csv",
]
