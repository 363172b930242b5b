import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def lattice_r1():
    from bergman_hankel.geometry import generate_lattice, partition_of_unity
    lat = generate_lattice(1.0, 0.99, seed=0)
    return lat, partition_of_unity(lat)


@pytest.fixture(scope="session")
def small_lattice():
    from bergman_hankel.geometry import generate_lattice, partition_of_unity
    lat = generate_lattice(1.0, 0.8, seed=0)
    return lat, partition_of_unity(lat)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
