import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deism.directivity import Medium
from deism.room import RoomSpec, TransducerPose


@pytest.fixture
def medium():
    return Medium()


@pytest.fixture
def room(medium):
    return RoomSpec(dimensions=(4.0, 3.0, 2.5), zeta=18.0, medium=medium)


@pytest.fixture
def poses():
    return (
        TransducerPose(position=(1.1, 1.1, 1.3)),
        TransducerPose(position=(2.9, 1.9, 1.3), yaw=np.pi),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)
