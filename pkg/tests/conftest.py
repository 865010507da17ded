import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reslab import HorseshoeSuspension, PrimitiveOrbit, ToralSuspension, orbit_data  # noqa: E402

CAT = ((2, 1), (1, 1))


@pytest.fixture(scope="session")
def cat_spec():
    return ToralSuspension(CAT)


@pytest.fixture(scope="session")
def cat_data(cat_spec):
    return orbit_data(cat_spec)


@pytest.fixture(scope="session")
def horseshoe_spec():
    return HorseshoeSuspension(4.0, 0.25, 2, (1.0, 1.0))


@pytest.fixture(scope="session")
def horseshoe_data(horseshoe_spec):
    return orbit_data(horseshoe_spec)


@pytest.fixture(scope="session")
def signed_horseshoe_spec():
    return HorseshoeSuspension(4.0, 0.25, 2, (1.0, -3.0))


@pytest.fixture
def saddle_orbit():
    return PrimitiveOrbit("g", 1.0, (math.exp(0.7),), 1)
