import numpy as np
import pytest

from orthocal import kinematics


@pytest.fixture
def geometry():
    return kinematics.DEFAULT_GEOMETRY


@pytest.fixture
def rng():
    return np.random.default_rng(20240815)


def sample_points(geometry, n, rng, fraction=0.35):
    """Random TCP positions in a box safely inside the reachable workspace."""
    half = fraction * geometry.leg_length
    return rng.uniform(-half, half, size=(n, 3))
