import numpy as np
import pytest

from advect2d import corpus

SEED = 20260817


@pytest.fixture(scope="session")
def triangle():
    return corpus.example_triangle()


@pytest.fixture(scope="session")
def seven():
    return corpus.example_seven_segments()


@pytest.fixture(scope="session")
def square():
    return corpus.example_square()


@pytest.fixture()
def rng():
    return np.random.default_rng(SEED)
