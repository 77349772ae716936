import numpy as np
import pytest

from rydline import species as sp_mod
from rydline.scattering import PhaseShiftModel

ALPHA_RB = 319.2


@pytest.fixture(scope="session")
def rb():
    return sp_mod.load_species("rb")


@pytest.fixture(scope="session")
def born2():
    return PhaseShiftModel.born(2, ALPHA_RB)


def synthetic_table(L, scale, k_max=0.5, n=200):
    """Smooth threshold-law table ``delta = scale * k^(2L+1) / (1 + k^2)`` (``L=0``: ``-scale * k``)."""
    k = np.linspace(0.0, k_max, n)
    if L == 0:
        d = -scale * k
    else:
        d = scale * k ** (2 * L + 1) / (1 + k * k)
    return sp_mod.PhaseShiftTable(L=L, k=k, delta=d)


@pytest.fixture(scope="session")
def rb_born_models(born2):
    return {2: born2}
