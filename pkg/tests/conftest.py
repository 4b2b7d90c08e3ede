import numpy as np
import pytest

from robustmix import Graph, Instance


@pytest.fixture
def diamond():
    """Two parallel 2-arc routes from node 0 to node 3."""
    return Graph(4, ((0, 1), (1, 3), (0, 2), (2, 3)))


@pytest.fixture
def diamond_inst(diamond):
    return Instance.spath(diamond, 0, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
