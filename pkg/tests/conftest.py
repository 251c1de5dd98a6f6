import numpy as np
import pytest

from granuflow.model import DomainBox, State
from granuflow.profiles import Profile


@pytest.fixture(scope="session")
def box():
    return DomainBox()


@pytest.fixture(scope="session")
def small_profile():
    return Profile.from_jumps(
        State(0.02, 1.02),
        [(0.0, State(0.04, 0.95)), (0.3, State(0.01, 1.05)),
         (0.7, State(0.03, 1.0)), (1.0, State(0.02, 1.02))])


def sample_states(box, n, seed=0):
    rng = np.random.default_rng(seed)
    return box.sample(rng, n)
