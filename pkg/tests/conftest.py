import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from metric_grf.graph import MetricGraph, default_test_graph

# first calls compile numba kernels, so per-example deadlines are meaningless
settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def default_graph():
    return default_test_graph()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def mixed_graph():
    """Parallel edges, non-unit lengths and one edge too short to hold interior nodes."""
    return MetricGraph.from_edges(5, [
        (0, 1, 1.0), (0, 1, 0.6), (1, 2, 0.35), (2, 3, 0.1), (3, 0, 0.8), (2, 4, 0.45),
    ])


def nested_graph():
    """Parallel edges and mixed lengths, all multiples of 0.2 so h = 0.2 / k meshes nest."""
    return MetricGraph.from_edges(5, [
        (0, 1, 1.0), (0, 1, 0.6), (1, 2, 0.4), (2, 3, 0.2), (3, 0, 0.8), (2, 4, 1.2),
    ])


@pytest.fixture
def odd_graph():
    return mixed_graph()
