import numpy as np
import pytest

from jacobi_resonance.background import PeriodicBackground
from jacobi_resonance.draws import random_pair
from jacobi_resonance.perturbed import Perturbation


@pytest.fixture
def bg2():
    return PeriodicBackground((0.5, 2.0), (0.0, 0.0))


@pytest.fixture
def pert1():
    return Perturbation((0.0, 1.0), (1.0, 0.0))


@pytest.fixture
def free2():
    return PeriodicBackground((1.0, 1.0), (0.0, 0.0))


def draws(seed, count, **kw):
    """Reproducible list of ``(background, perturbation)`` pairs."""
    rng = np.random.default_rng(seed)
    return [random_pair(rng, **kw) for _ in range(count)]
