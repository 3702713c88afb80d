import random
import pytest
import numpy as np

from click.testing import CliRunner

from services.holonomy import HolonomyEngine
from services.nilpotent_groups import CrossedComplexGroups

SEED = 20240229


@pytest.fixture
def rng():
    return random.Random(SEED)


@pytest.fixture
def np_rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def groups():
    """CrossedComplexGroups per (n, d), built once per session."""
    cache = {}

    def get(n: int, d: int) -> CrossedComplexGroups:
        if (n, d) not in cache:
            cache[(n, d)] = CrossedComplexGroups.build(n, d)
        return cache[(n, d)]

    return get


@pytest.fixture(scope="session")
def engines():
    cache = {}

    def get(n: int, d: int) -> HolonomyEngine:
        if (n, d) not in cache:
            cache[(n, d)] = HolonomyEngine.build(n, d)
        return cache[(n, d)]

    return get


@pytest.fixture
def runner():
    return CliRunner()
