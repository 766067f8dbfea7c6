import numpy as np
import pytest

from fragspec import (AngularBasis, RadialGrid, load_potential_table,
                      model_potential, shipped_table_path)

MASS = 918.0763505


@pytest.fixture(scope="session")
def h2plus():
    return load_potential_table(shipped_table_path())


@pytest.fixture(scope="session")
def solver_grid():
    return RadialGrid(n_r=1024, r_min=0.2, r_max=80.0)


@pytest.fixture(scope="session")
def harmonic():
    return model_potential("harmonic", {"omega": 0.01, "r0": 2.0,
                                        "r_max": 6.0, "n_samples": 801})


@pytest.fixture(scope="session")
def harmonic_grid():
    return RadialGrid(n_r=256, r_min=0.2, r_max=6.0, k_max_expected=10.0)


@pytest.fixture(scope="session")
def basis8():
    return AngularBasis(m_n=0, n_l=8)


def gl_nodes(n):
    return np.polynomial.legendre.leggauss(n)
