import numpy as np
import pytest

from gnpest import rng as rngmod
from gnpest.graphs import AdjacencyMatrix, GraphParams, sample_er


@pytest.fixture
def stream():
    def make(*tags):
        return rngmod.stream(20260824, *tags)

    return make


@pytest.fixture
def small_graph(stream):
    return sample_er(GraphParams(n=30, p=0.4, gamma=0.0), stream("small"))


def random_symmetric(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) * scale
    m = (m + m.T) / 2.0
    return m


def adjacency_from_dense(bits):
    """Build an AdjacencyMatrix from any 0/1 matrix's upper triangle."""
    b = np.triu(np.asarray(bits, dtype=np.uint8), k=1)
    return AdjacencyMatrix(b | b.T, validate=False)
