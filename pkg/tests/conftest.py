import numpy as np
import pytest

from cmvspec.presets import (constant_function, golden_frequency,
                             sqrt_frequency, strong_coupling, zero_function)


@pytest.fixture(scope="session")
def freq1():
    return golden_frequency()


@pytest.fixture(scope="session")
def freq2():
    return sqrt_frequency()


@pytest.fixture(scope="session")
def f_const():
    return constant_function(0.5, dim=1)


@pytest.fixture(scope="session")
def f_zero():
    return zero_function(dim=1)


@pytest.fixture(scope="session")
def f_two_mode():
    return strong_coupling()


def random_unit(rng) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))
