import numpy as np
import pytest

from aimpart import density, grids


@pytest.fixture
def appendix_density():
    """Two normalized Gaussians (0.1 / 0.5) separated by 1.131 bohr on z."""
    r1, r2 = np.zeros(3), np.array([0.0, 0.0, 1.131])
    rho = density.AnalyticDensity(terms=[
        ("gaussian_s", r1, 0.1, 1.0),
        ("gaussian_s", r2, 0.5, 1.0),
    ])
    return rho, np.vstack([r1, r2])


@pytest.fixture
def diatomic_grids():
    def build(positions, nr=300, rmax=15.0, ns=120, angular="axial", radial="gauss_legendre"):
        return grids.AtomicGridSet(positions,
                                   grids.build_radial(nr, rmax, radial),
                                   grids.build_angular(ns, angular))
    return build
