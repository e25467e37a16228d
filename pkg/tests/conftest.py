from fractions import Fraction

import pytest
from hypothesis import settings

from gridprod.numberfield import find_units, make_field

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

CUBIC = (-1, -3, 0, 1)
GOLDEN = (-1, -1, 1)


@pytest.fixture(scope="session")
def cubic():
    return make_field(CUBIC)


@pytest.fixture(scope="session")
def golden():
    return make_field(GOLDEN)


@pytest.fixture(scope="session")
def cubic_units(cubic):
    return find_units(cubic, 10)


@pytest.fixture(scope="session")
def golden_units(golden):
    return find_units(golden, 10)


def frac(a, b=1):
    return Fraction(a, b)
