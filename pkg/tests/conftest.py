import pytest

from specgap import build_exponential, build_identity

EXP_RHO_PATTERN = (0.2, 0.5, 0.9)


@pytest.fixture(scope="session")
def identity64():
    return build_identity(64, 256)


@pytest.fixture(scope="session")
def exp64():
    rhos = [EXP_RHO_PATTERN[i % 3] for i in range(256)]
    return build_exponential(64, 256, rhos)


@pytest.fixture(scope="session")
def exp_small():
    return build_exponential(2, 3, [0.5, 0.5, 0.5])
