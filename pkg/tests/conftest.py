import numpy as np
import pytest

from pecking import seeds


@pytest.fixture
def rng():
    return seeds.generator(123456789)


def make_rng(seed: int) -> np.random.Generator:
    return seeds.generator(seed)
