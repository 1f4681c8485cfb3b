"""Shared fixtures: a tiny rendered dataset reused across test modules."""

import numpy as np
import pytest

from sedlab.scene.dataset import DatasetConfig, generate_dataset


@pytest.fixture(scope="session")
def tiny_ds(tmp_path_factory):
    """4/2/2 scenes of 8 s, both formats, fixed seed. ~3 s to build."""
    root = tmp_path_factory.mktemp("tiny_ds")
    cfg = DatasetConfig(
        root=root,
        n_train=4,
        n_val=2,
        n_test=2,
        scene_duration=8.0,
        seed=123,
    )
    generate_dataset(cfg)
    return root


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
