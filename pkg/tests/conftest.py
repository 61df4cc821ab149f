import numpy as np
import pytest

from tempered_plaplacian.config import config_from_preset
from tempered_plaplacian.core_types import (
    Discretization, InitialData, OperatorParams, ReactionTerm, SimulationConfig,
    TemperingFunction
)
from tempered_plaplacian.operator import QuadratureSpec
from tempered_plaplacian.solver import run


@pytest.fixture
def params():
    """Default parameters of the logistic runs: n=2, s=0.5, p=2.5, lambda=0.1."""
    return OperatorParams.build(2, 0.5, 2.5, 0.1, TemperingFunction('identity'))


@pytest.fixture
def linear_params():
    return OperatorParams.build(2, 0.5, 2.0, 0.0, TemperingFunction('identity'))


@pytest.fixture
def quad():
    return QuadratureSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def logistic_config(params):
    return SimulationConfig(
        params=params,
        reaction=ReactionTerm('logistic'),
        initial=InitialData('barrier', amplitude=0.5),
        discretization=Discretization('grid', h=1.0 / 8),
        t_end=0.5,
        snapshot_every=0.1,
        steady_window=0.1,
    )


@pytest.fixture(scope='session')
def logistic_steady():
    """Trajectory and steady profile of the quick preset, shared by the slow checks."""
    return run(config_from_preset('quick').simulation)
