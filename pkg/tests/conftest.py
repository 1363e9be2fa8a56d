import os

import numpy as np
import pytest
import torch

from config import ExperimentConfig
from synthetic import generate_synthetic
from time_series import TimeSeriesDataset, znormalize

TINY_TS = """# two samples, two dimensions, three timestamps
@problemName Tiny
@timeStamps false
@missing false
@univariate false
@dimensions 2
@equalLength true
@seriesLength 3
@classLabel true a b
@data
1,2,3:4,5,6:a
7,8,9:1,2,3:b
"""


@pytest.fixture
def tiny_ts(tmp_path):
    path = tmp_path / "Tiny_TRAIN.ts"
    path.write_text(TINY_TS, encoding="utf-8")
    return path


@pytest.fixture
def write_ts(tmp_path):
    """Writes a .ts body under tmp_path and returns its path."""
    def write(text, name="Sample.ts"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write


@pytest.fixture
def micro_dataset():
    rng = np.random.default_rng(7)
    return TimeSeriesDataset("micro", rng.standard_normal((6, 8, 2)), np.array([0, 0, 0, 1, 1, 1]))


@pytest.fixture
def micro_config():
    return ExperimentConfig(n_views=2, embed_dim=4, key_dim=4, kernel_widths=[3, 5], epochs=3, seeds=[0],
                            kmeans_restarts=2)


@pytest.fixture
def quick_dataset():
    return znormalize(generate_synthetic(n_per_cluster=4, g=2, T=16, D=2, redundancy_fraction=0.5,
                                         noise_std=0.1, seed=0))


@pytest.fixture
def quick_config():
    return ExperimentConfig(n_views=2, embed_dim=8, key_dim=4, kernel_widths=[3, 5], epochs=4, seeds=[0, 1],
                            kmeans_restarts=2, kmeans_max_iter=50)


@pytest.fixture
def synthetic_benchmark():
    """The separable redundancy dataset used by the end-to-end checks."""
    return znormalize(generate_synthetic(n_per_cluster=10, g=3, T=64, D=3, redundancy_fraction=0.5,
                                         noise_std=0.1, seed=0))


@pytest.fixture(autouse=True)
def fixed_torch_seed():
    torch.manual_seed(0)


@pytest.fixture
def uea_dir():
    """The local UEA archive, or a skip when EMTC_DATA_DIR is not set."""
    path = os.environ.get("EMTC_DATA_DIR")
    if not path or not os.path.isdir(path):
        pytest.skip("EMTC_DATA_DIR does not point at a UEA archive")
    return path
