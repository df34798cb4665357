"""Shared fixtures: a small trained classifier and common track objects.

The session tests need a model that is confident enough to pass the
debounce gate; training one takes under a second at this size, and the
session scope means the whole suite pays that cost once.
"""

import numpy as np
import pytest

from gesturepilot.drone_sim import default_track
from gesturepilot.gesture_net import (
    TrainConfig,
    generate_dataset,
    split_dataset,
    train,
)

QUICK_LAYERS = (42, 64, 8)
QUICK_CONFIG = TrainConfig(epochs=60, learning_rate=3e-3)


@pytest.fixture(scope="session")
def quick_dataset():
    return generate_dataset(seed=0, samples_per_class=200)


@pytest.fixture(scope="session")
def session_model(quick_dataset):
    train_set, _ = split_dataset(quick_dataset, 0.8, seed=0)
    model, _ = train(train_set, QUICK_CONFIG, layer_sizes=QUICK_LAYERS)
    return model


@pytest.fixture(scope="session")
def circuit():
    return default_track()
