import numpy as np
import pytest

from pylevytools.core.env_manager import EnvManager, get_env_manager, set_env_manager
from pylevytools.levy.entities import CauchyTail
from pylevytools.reconstruct.entities import GridSpec, GridFunction
from pylevytools.reconstruct.lib import density_from_characteristic, ground_state
from pylevytools.reference.entities import HarmonicOscillator
from pylevytools.reference.lib import ho_exact
from pylevytools.schrodinger.entities import MatrixElements
from pylevytools.schrodinger.lib import solve, matrix_elements


@pytest.fixture(autouse=True)
def fresh_env_manager():
    previous = get_env_manager()
    set_env_manager(EnvManager())
    yield
    set_env_manager(previous)


@pytest.fixture(scope="session")
def default_grid():
    return GridSpec(L=12.0, n=2001)


@pytest.fixture(scope="session")
def cauchy_rho(default_grid):
    return density_from_characteristic(CauchyTail(a=1.0), default_grid)


@pytest.fixture(scope="session")
def ho_forms():
    return HarmonicOscillator(1.0).closed_forms()


@pytest.fixture(scope="session")
def ho_phi0(default_grid, ho_forms):
    return ground_state(GridFunction.from_function(default_grid, ho_forms.rho))


@pytest.fixture(scope="session")
def ho_spectrum(default_grid, ho_forms):
    return solve(GridFunction.from_function(default_grid, ho_forms.potential), 9)


@pytest.fixture(scope="session")
def ho_numeric_q(ho_spectrum):
    return matrix_elements(ho_spectrum)


@pytest.fixture(scope="session")
def ho_exact_q():
    return ho_exact(1.0, 30)


@pytest.fixture(scope="session")
def anharmonic_q():
    """Four parity alternating states with a nonzero truncated fourth moment."""
    q = np.zeros((4, 4))
    for (k, l), value in {(0, 1): 0.7, (0, 3): 0.2, (1, 2): 0.5, (2, 3): 0.3}.items():
        q[k, l] = q[l, k] = value
    return MatrixElements(q=q, energies=np.array([0.0, 1.0, 2.5, 4.0]))