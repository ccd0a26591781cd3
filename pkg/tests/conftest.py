"""Shared fixtures: phantoms, model weights, and serialized files on disk."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from organpoint.model import ModelWeights, ResidualBlock
from organpoint.phantoms import STANDARD_PHANTOMS
from organpoint.volume import synth_phantom

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


# ---------------------------------------------------------------------------
# Phantoms: the package's stock 64^3 @ 2 mm geometries.

PHANTOM_SPECS = STANDARD_PHANTOMS


@pytest.fixture(scope="session")
def phantoms():
    """name -> (Volume, LabelMask) for the three standard phantoms."""
    return {name: synth_phantom(make()) for name, make in PHANTOM_SPECS.items()}


@pytest.fixture(scope="session")
def sphere_phantom(phantoms):
    return phantoms["sphere"]


# ---------------------------------------------------------------------------
# Model weights.


def random_weights(input_dim=6561, hidden=16, blocks=2, classes=3, seed=7,
                   scale=0.05) -> ModelWeights:
    rng = np.random.Generator(np.random.PCG64(seed))

    def t(*shape):
        return (rng.standard_normal(shape) * scale).astype(np.float32)

    block_weights = tuple(
        ResidualBlock(
            t(hidden, hidden), t(hidden), np.ones(hidden, np.float32), t(hidden),
            t(hidden, hidden), t(hidden), np.ones(hidden, np.float32), t(hidden),
        )
        for _ in range(blocks)
    )
    names = tuple(f"class-{c}" for c in range(classes))
    return ModelWeights(
        input_dim, hidden, classes, names,
        t(hidden, input_dim), t(hidden), block_weights,
        t(classes, hidden), t(classes),
    )


@pytest.fixture(scope="session")
def tiny_weights() -> ModelWeights:
    return random_weights()


@pytest.fixture(scope="session")
def full_size_weights() -> ModelWeights:
    """The deployment shape: 4 residual blocks, 128 hidden units."""
    return random_weights(hidden=128, blocks=4, classes=14, seed=11)
