import numpy as np
import pytest

from lowerframe import GeneratorSpec, VectorFamily, generate_family

SQ2 = np.sqrt(2.0)


@pytest.fixture
def two_vector():
    """The family {(1, 0), (1, 1)} with a zero tail."""
    return VectorFamily([[1, 0], [1, 1]], field="real")


@pytest.fixture
def orthonormal3():
    return generate_family(GeneratorSpec("orthonormal", 3))


def random_family(seed, dim, count, tail="zero"):
    spec = GeneratorSpec("random_gaussian", dim, count, tail, {"seed": seed})
    return generate_family(spec)
