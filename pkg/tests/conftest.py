import numpy as np
import pytest

from oqwalk import models, structure
from oqwalk.structure import DiagonalState


@pytest.fixture(scope="session")
def two_state():
    return models.two_state_biased_walk()


@pytest.fixture(scope="session")
def four_state():
    return models.four_state_family(1 / 6, 1 / 6, 1 / 6)


@pytest.fixture(scope="session")
def four_state_half():
    return models.four_state_family(0.0, 0.0, 0.5)


@pytest.fixture(scope="session")
def commuting():
    return models.default_commuting_walk()


@pytest.fixture(scope="session")
def irreducible():
    return models.irreducible_two_state()


@pytest.fixture(scope="session")
def two_state_dec(two_state):
    return structure.decompose(two_state, seed=0)


@pytest.fixture(scope="session")
def four_state_dec(four_state):
    return structure.decompose(four_state, seed=0)


@pytest.fixture(scope="session")
def four_state_half_dec(four_state_half):
    return structure.decompose(four_state_half, seed=0)


@pytest.fixture(scope="session")
def commuting_dec(commuting):
    return structure.decompose(commuting, seed=0)


@pytest.fixture(scope="session")
def transient_start():
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = 1.0
    return DiagonalState.single_site(mat)


@pytest.fixture(scope="session")
def balanced_recurrent():
    mat = np.zeros((4, 4), dtype=complex)
    mat[1, 1] = mat[2, 2] = mat[3, 3] = 1 / 3
    return DiagonalState.single_site(mat)
