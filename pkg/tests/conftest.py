import numpy as np
import pytest

from wbl import Disc, Moon


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def unit_disc():
    return Disc(0j, 1.0)


@pytest.fixture(scope="session")
def unit_moon():
    """Moon with the unit circle outside and the origin inside the hole."""
    return Moon(Disc(0j, 1.0), Disc(0.45 + 0j, 0.55))


@pytest.fixture(scope="session")
def figure_moon():
    """Moon between the radius-2 circle and the circle at 1.3 of radius 0.7."""
    return Moon(Disc(0j, 2.0), Disc(1.3 + 0j, 0.7))


def sample_interior(domain, n, seed=5):
    """Deterministic interior points of a domain, rejection-sampled in its box."""
    gen = np.random.default_rng(seed)
    x0, x1, y0, y1 = domain.bounding_box()
    pts = []
    while len(pts) < n:
        z = complex(gen.uniform(x0, x1), gen.uniform(y0, y1))
        if bool(domain.contains(z)):
            pts.append(z)
    return np.array(pts)
