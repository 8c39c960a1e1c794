import numpy as np
import pytest

from metriplex.brackets import PoissonField, StructureConstants
from metriplex.systems import kida_structure_constants


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def so3():
    return StructureConstants.so3()


@pytest.fixture
def kida_c():
    return kida_structure_constants()


@pytest.fixture
def so3_poisson(so3):
    return PoissonField.lie_poisson(so3)


@pytest.fixture
def delta3():
    d = np.eye(3)
    return np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d)


def random_spd(rng, n, shift=1.0):
    A = rng.standard_normal((n, n))
    return A @ A.T + shift * np.eye(n)
