import os

import pytest

from forestalgebra.algebra import load_algebra

FIXDIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXDIR, name)


@pytest.fixture(scope="session")
def contains_a():
    return load_algebra(fixture_path("contains_a.alg"))


@pytest.fixture(scope="session")
def two_a():
    return load_algebra(fixture_path("two_a.alg"))


@pytest.fixture(scope="session")
def inf_branch():
    return load_algebra(fixture_path("inf_branch.alg"))


@pytest.fixture(scope="session")
def all_algebras(contains_a, two_a, inf_branch):
    return [contains_a, two_a, inf_branch]
