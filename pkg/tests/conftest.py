import numpy as np
import pytest

from filteropt.instrument import DEFAULT_SIMULATOR
from filteropt.metricspace import explore, metric_for
from filteropt.spectra import generate_library

DESK_SEED = 7
DESK_L = 200
DESK_Q = 256
DESK_M = 8


@pytest.fixture(scope="session")
def library():
    return generate_library(DESK_SEED, DESK_L, DESK_Q)


@pytest.fixture(scope="session")
def small_library():
    return generate_library(3, 30, 64)


@pytest.fixture(scope="session")
def sim_config():
    return DEFAULT_SIMULATOR


@pytest.fixture(scope="session")
def metric_d1(library):
    return metric_for(library, "d1")


@pytest.fixture(scope="session")
def metric_d2(library):
    return metric_for(library, "d2")


@pytest.fixture(scope="session")
def ctx_d1(library):
    return explore(library, "d1", R=10, m=DESK_M, seed=DESK_SEED)


@pytest.fixture(scope="session")
def ctx_d2(library):
    return explore(library, "d2", R=10, m=DESK_M, seed=DESK_SEED)


def brute_force_lap(metric, x, y):
    """Exhaustive assignment minimum; independent oracle for small M."""
    import itertools
    import math

    m = len(x)
    best = math.inf
    for perm in itertools.permutations(range(m)):
        total = math.fsum(metric.dist(x[i], y[perm[i]]) for i in range(m))
        best = min(best, total)
    return best


@pytest.fixture(scope="session")
def rng_factory():
    def make(seed):
        return np.random.default_rng(seed)

    return make
