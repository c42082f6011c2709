"""
Shared fixtures for the QUBO preprocessing test suite.
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.models.qubo import QuboInstance


def make_random_instance(rng, n, density=0.4, ub=10, outlier_share=0.0, outlier_mult=10,
                         linear_share=1.0):
    """
    Random integer instance for oracle-sized checks.

    Each pair is an edge with probability ``density``; values are nonzero
    uniform in [-ub, ub], and an ``outlier_share`` of them is multiplied.
    """
    instance = QuboInstance(n)
    for i in range(n):
        if rng.random() < linear_share:
            value = int(rng.integers(-ub, ub + 1))
            if rng.random() < outlier_share:
                value *= outlier_mult
            instance.set_linear(i, value)
        for j in range(i + 1, n):
            if rng.random() < density:
                value = int(rng.integers(1, ub + 1)) * int(rng.choice([-1, 1]))
                if rng.random() < outlier_share:
                    value *= outlier_mult
                instance.set_quadratic(i, j, value)
    return instance


@pytest.fixture
def random_instance():
    """Factory: random_instance(seed, n, **kwargs) -> QuboInstance."""
    def factory(seed, n, **kwargs):
        return make_random_instance(np.random.default_rng(seed), n, **kwargs)
    return factory


@pytest.fixture
def positive_five():
    """Five-variable instance with an over-capacity node 1 (0-based 0)."""
    return QuboInstance.from_dict(
        5,
        linear={0: 5, 1: 8, 2: 3, 3: -2, 4: 5},
        quadratic={
            (0, 1): 2, (0, 2): 2, (0, 3): 2, (0, 4): 2,
            (1, 2): 2, (1, 3): 2, (1, 4): 2,
            (2, 4): 3, (3, 4): 4,
        },
    )


@pytest.fixture
def mixed_five():
    """Five nodes; node 1 has four edges."""
    return QuboInstance.from_dict(
        5,
        linear={0: 1, 1: -1, 2: 2, 3: -3, 4: 1},
        quadratic={(0, 1): 3, (0, 2): -2, (0, 3): 4, (0, 4): -1, (1, 2): 2, (3, 4): -2},
    )


@pytest.fixture
def cascade():
    """c_11=5, c_12=-3, c_22=1: Rule 1 fixes x1, then Rule 2 fixes x2."""
    return QuboInstance.from_dict(2, linear={0: 5, 1: 1}, quadratic={(0, 1): -3})


@pytest.fixture
def rule3_example():
    """Rule 1 fails for x1 and x2 but Rule 3 fixes both to 1."""
    return QuboInstance.from_dict(
        3,
        linear={0: 1, 1: 1, 2: 4},
        quadratic={(0, 1): 3, (0, 2): -2, (1, 2): -2},
    )


@pytest.fixture
def maxcut_triangle():
    return QuboInstance.from_dict(
        3,
        linear={0: 2, 1: 2, 2: 2},
        quadratic={(0, 1): -2, (0, 2): -2, (1, 2): -2},
    )
