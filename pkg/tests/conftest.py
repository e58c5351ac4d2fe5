import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lowrank_entropy.characteristics import build_shock_table, extend_initial
from lowrank_entropy.flux import burgers
from lowrank_entropy.oracle import LaxOleinikOracle
from lowrank_entropy.presets import get_preset
from lowrank_entropy.pwlin import Interval

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Problem:
    def __init__(self, name, n_grid=512):
        p = get_preset(name)
        self.name, self.u0, self.T = name, p.u0, p.T
        self.flux = burgers()
        self.oracle = LaxOleinikOracle(self.u0, self.flux, self.T, Interval(0.0, 1.0))
        self.ext = extend_initial(self.u0, self.flux)
        self.table = build_shock_table(self.ext, self.oracle, n_grid=n_grid)


_CACHE = {}


def problem(name):
    if name not in _CACHE:
        _CACHE[name] = Problem(name)
    return _CACHE[name]


@pytest.fixture
def merge():
    return problem("merge_two_shocks")


@pytest.fixture
def stationary():
    return problem("stationary_shock")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
