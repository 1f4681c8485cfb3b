"""Multichannel scene synthesis: array models, event atoms, rendering."""

from .arrays import (
    SPEED_OF_SOUND,
    TETRA_CAPSULES_DEG,
    TETRA_RADIUS_M,
    ArrayFormat,
    foa_response,
    mic_phase,
    path_difference,
    unit_vector,
)
from .atoms import ATOMS, DEFAULT_ATOMS, N_CLASSES, render_atom
from .dataset import DatasetConfig, generate_dataset, read_manifest, sample_scene
from .render import render_scene
from .types import (
    DEFAULT_SAMPLE_RATE,
    TRAJECTORY_HOP_S,
    EventSpec,
    MultichannelAudio,
    SceneSpec,
)

__all__ = [
    "ATOMS",
    "ArrayFormat",
    "DatasetConfig",
    "DEFAULT_ATOMS",
    "DEFAULT_SAMPLE_RATE",
    "EventSpec",
    "MultichannelAudio",
    "N_CLASSES",
    "SPEED_OF_SOUND",
    "SceneSpec",
    "TETRA_CAPSULES_DEG",
    "TETRA_RADIUS_M",
    "TRAJECTORY_HOP_S",
    "foa_response",
    "generate_dataset",
    "mic_phase",
    "path_difference",
    "read_manifest",
    "render_atom",
    "render_scene",
    "sample_scene",
    "unit_vector",
]
