import numpy as np
import pytest

from seamqec.lattice import LatticeSpec, build_graph
from seamqec.noise import NoiseParams, assign_edge_probabilities, assign_probabilities


def weighted(L, T=0, seams=(), p_bulk=0.0125, p_seam=0.05):
    return assign_probabilities(build_graph(LatticeSpec(L, T, seams)), NoiseParams(p_bulk, p_seam))


def random_weighted(L, T=0, seed=0, low=0.01, high=0.3):
    """Graph with independent random edge probabilities (generic, tie-free weights)."""
    g = build_graph(LatticeSpec(L, T))
    rng = np.random.default_rng(seed)
    return assign_edge_probabilities(g, rng.uniform(low, high, g.n_edges))


@pytest.fixture
def uniform_l3():
    """L=3, T=0 with every edge at p = 0.05."""
    return weighted(3)
