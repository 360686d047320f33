import numpy as np
import pytest

from isbst.fbd import build_ramp_diagram
from isbst.mutation import study_set


@pytest.fixture(scope="session")
def ramp():
    return build_ramp_diagram()


@pytest.fixture(scope="session")
def shipped_study():
    return study_set()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
