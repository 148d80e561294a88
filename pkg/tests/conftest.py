import numpy as np
import pytest

from anosovlab.flow import SuspensionFlow
from anosovlab.roof import RoofFunction, TrigPolynomial
from anosovlab.spectral import IntegerMatrix


@pytest.fixture(scope="session")
def cat_map():
    return IntegerMatrix([[2, 1], [1, 1]])


@pytest.fixture(scope="session")
def companion3():
    # x^3 + x^2 - 1: codimension one with a complex unstable pair
    return IntegerMatrix.companion([-1, 0, 1, 1])


@pytest.fixture(scope="session")
def quartic_real():
    # x^4 - x^3 - 4x^2 + 4x + 1: totally real, codimension one
    return IntegerMatrix.companion([1, 4, -4, -1, 1])


def cos_roof(dim: int, amplitude: float = 0.1) -> RoofFunction:
    return RoofFunction(
        TrigPolynomial.constant(1.0, dim)
        + TrigPolynomial.cosine(amplitude, (1,) + (0,) * (dim - 1), dim)
    )


@pytest.fixture(scope="session")
def cat_flow(cat_map):
    return SuspensionFlow(cat_map, cos_roof(2))


@pytest.fixture(scope="session")
def companion3_flow(companion3):
    return SuspensionFlow(companion3, cos_roof(3))


@pytest.fixture(scope="session")
def companion3_const_flow(companion3):
    return SuspensionFlow(companion3, RoofFunction.constant(1.0, 3))


def assert_close(actual, expected, tol, label=""):
    err = abs(actual - expected)
    assert err <= tol, f"{label}: |{actual} - {expected}| = {err} > {tol}"


def rand_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)
