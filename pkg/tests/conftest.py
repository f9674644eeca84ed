import numpy as np
import pytest

from affsob import QuadratureBundle, RadialSpec, standard_family


@pytest.fixture(scope="session")
def bundle2():
    return QuadratureBundle.default(2)


@pytest.fixture(scope="session")
def lean2():
    # fractional-branch tests pay per sphere node; 48/48/20 keeps them quick
    # while the Gauss-Legendre box stays spectrally accurate
    return QuadratureBundle.default(2, box_nodes=48, sphere_resolution=48,
                                    radial_spec=RadialSpec(panels=20))


@pytest.fixture(scope="session")
def family():
    return standard_family()


@pytest.fixture(scope="session")
def radial(family):
    return family["radial"]


@pytest.fixture(scope="session")
def aniso(family):
    return family["aniso"]


@pytest.fixture(scope="session")
def hermite(family):
    return family["hermite"]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
