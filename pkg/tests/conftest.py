import numpy as np
import pytest

from bisar.geometry import AcquisitionGeometry


@pytest.fixture
def unit_geom():
    return AcquisitionGeometry(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
