import functools

import pytest

from kahler_fedosov.fedosov import fedosov_kahler
from kahler_fedosov.geom import builtin_model
from kahler_fedosov.modact import module_connection


@functools.lru_cache(maxsize=None)
def kahler_data(name: str, N: int = 6):
    return fedosov_kahler(builtin_model(name), N)


@functools.lru_cache(maxsize=None)
def module_data(name: str, N: int = 6):
    return module_connection(builtin_model(name), N)


@pytest.fixture(scope="session")
def cp1():
    return builtin_model("cp1")


@pytest.fixture(scope="session")
def F_cp1():
    return kahler_data("cp1", 6)
