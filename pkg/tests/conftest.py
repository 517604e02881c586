import pytest

from ganc.graph import from_edges
from helpers import path


@pytest.fixture
def triangle():
    return from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def chain4():
    return path(4)
