import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def normal10():
    """A fixed normal sample of size 10."""
    return np.random.default_rng(11).normal(10.0, 2.0, 10)


def mc_tolerance(p, n, k=3.0):
    """``k`` binomial standard errors at proportion ``p`` over ``n`` trials."""
    return k * np.sqrt(p * (1.0 - p) / n)
