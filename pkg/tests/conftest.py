import numpy as np
import pytest

from spikedigits.filters import default_filter_bank
from spikedigits.network import NetworkConfig
from spikedigits.strokes import synthetic_dataset


@pytest.fixture(scope="session")
def bank():
    return default_filter_bank()


@pytest.fixture(scope="session")
def cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def small_digits():
    """40 synthetic digits (4 per class) shared across fast tests."""
    return synthetic_dataset(4, seed=11)


@pytest.fixture(scope="session")
def toy_two_class():
    """The 20-image two-class problem used by convergence tests."""
    images, labels = synthetic_dataset(10, seed=42)
    keep = np.isin(labels, [0, 1])
    return images[keep][:20], labels[keep][:20]
