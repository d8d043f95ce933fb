import numpy as np
import pytest

from envmeta.tasks import make_explicit_quadratic_suite, make_quadratic_suite


@pytest.fixture
def pair_suite():
    """The asymmetric 1-D pair {z^2/2, (z-3)^2}: curvatures 1 and 2."""
    return make_explicit_quadratic_suite([[[1.0]], [[2.0]]], [[0.0], [3.0]])


@pytest.fixture
def small_suite():
    return make_quadratic_suite(n=4, d=3, mu=0.1, L=1.0, center_spread=1.0, seed=77)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=np.uint64(999)))
