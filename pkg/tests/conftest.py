import math

import pytest
from hypothesis import settings

from crofton.geometry import ConvexPolygon, Disk, Ellipse, unit_square

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def disk():
    return Disk((0.0, 0.0), 1.0)


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def hexagon():
    return ConvexPolygon(tuple((math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)))


@pytest.fixture
def ellipse():
    return Ellipse((0.3, -0.2), (2.0, 1.0), 0.4)
