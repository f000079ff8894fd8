import numpy as np
import pytest

from conetube.operators import ParameterSet


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def worked_params():
    """The reference n = 2 parameter set used throughout the norm suite."""
    return ParameterSet(n=2, p=2.0, q=2.0, alpha=(0.0, 0.0), beta=(0.0, 0.0),
                        a=(0.0, 0.0), b=(0.0, 0.0), c=(3.0, 3.0))
