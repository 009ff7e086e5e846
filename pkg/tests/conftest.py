import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qsimplicial.datasets import Task1Config, generate_complex_task1
from qsimplicial.topology import SimplicialComplex2


@pytest.fixture
def filled_triangle():
    return SimplicialComplex2(3, ((0, 1), (0, 2), (1, 2)), ((0, 1, 2),))


@pytest.fixture
def single_edge():
    return SimplicialComplex2(2, ((0, 1),))


@pytest.fixture
def empty_triangle():
    """Three edges forming a cycle, no 2-simplex."""
    return SimplicialComplex2(3, ((0, 1), (0, 2), (1, 2)))


@pytest.fixture
def two_triangles():
    """Two triangles sharing edge (1, 2)."""
    return SimplicialComplex2(
        4, ((0, 1), (0, 2), (1, 2), (1, 3), (2, 3)), ((0, 1, 2), (1, 2, 3)))


def random_task1_complexes(count, seed=0):
    """Deterministic stream of task-1 style random complexes."""
    rng = np.random.default_rng(seed)
    config = Task1Config()
    return [generate_complex_task1(config, rng) for _ in range(count)]
