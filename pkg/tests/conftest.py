import random
import warnings

import pytest

from services.fans import hirzebruch, p1_times_p1, projective_space, tropical_line, tropical_plane


@pytest.fixture(autouse=True)
def ignore_pydantic_warnings():
    warnings.filterwarnings("ignore", category=DeprecationWarning, module="pydantic")


@pytest.fixture
def rng():
    return random.Random(20240517)


@pytest.fixture
def p2():
    return projective_space(2)


@pytest.fixture
def p3():
    return projective_space(3)


@pytest.fixture
def p1xp1():
    return p1_times_p1()


@pytest.fixture
def f2():
    return hirzebruch(2)


@pytest.fixture
def line():
    return tropical_line()


@pytest.fixture
def plane():
    return tropical_plane()
