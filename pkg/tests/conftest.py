import numpy as np
import pytest

from dyadicpara import AdaptedFamily, standard_triple


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def haar1():
    return AdaptedFamily.haar(1)


@pytest.fixture
def haar2():
    return AdaptedFamily.haar(2)


@pytest.fixture
def triple1():
    return standard_triple(1, "haar")


@pytest.fixture
def triple2():
    return standard_triple(2, "haar")
