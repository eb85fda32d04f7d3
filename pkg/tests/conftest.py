import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mtescape.maps import UnimodalMap, critical_orbit
from mtescape.measure import build_ulam, default_breakpoints, invariant_density
from mtescape.symbolic import build_partition

settings.register_profile(
    "mtescape", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("mtescape")

A_SECOND = 3.9334240747966653


def arcsine_cdf(x):
    """Distribution function of the invariant law of x -> 4x(1-x)."""
    return 2.0 / np.pi * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))


@pytest.fixture(scope="session")
def full_map():
    return UnimodalMap(4.0)


@pytest.fixture(scope="session")
def second_map():
    return UnimodalMap(A_SECOND)


@pytest.fixture(scope="session")
def full_orbit(full_map):
    return critical_orbit(full_map)


@pytest.fixture(scope="session")
def second_orbit(second_map):
    return critical_orbit(second_map)


@pytest.fixture(scope="session")
def full_partition(full_map, full_orbit):
    return build_partition(full_orbit, full_map)


@pytest.fixture(scope="session")
def second_partition(second_map, second_orbit):
    return build_partition(second_orbit, second_map)


@pytest.fixture(scope="session")
def density_full(full_map, full_orbit):
    """A=4 density on 2**15 bins."""
    op = build_ulam(full_map, 1 << 15, breakpoints=default_breakpoints(full_map, full_orbit))
    return invariant_density(op, orbit=full_orbit)


@pytest.fixture(scope="session")
def density_full_14(full_map, full_orbit):
    op = build_ulam(full_map, 1 << 14, breakpoints=default_breakpoints(full_map, full_orbit))
    return invariant_density(op, orbit=full_orbit)


@pytest.fixture(scope="session")
def density_second(second_map, second_orbit):
    op = build_ulam(second_map, 1 << 15,
                    breakpoints=default_breakpoints(second_map, second_orbit))
    return invariant_density(op, orbit=second_orbit)
