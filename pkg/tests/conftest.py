import math

import pytest

from glidetop import EulerState, PhysicalParams, euler_to_vector


@pytest.fixture
def params() -> PhysicalParams:
    return PhysicalParams(m=1.0, g=9.81, l=0.1, I1=0.002, I3=0.001)


@pytest.fixture
def generic_euler() -> tuple[EulerState, float]:
    return EulerState(0.5, 0.8, 4.0, 150.0, 0.06, -0.04), 0.3


@pytest.fixture
def generic_state(params, generic_euler):
    es, phi = generic_euler
    return euler_to_vector(es, phi, params)


def tilt_state(params, theta=0.3, LA3=0.2, nux=0.05):
    es = EulerState(theta, 0.0, 0.0, LA3 / params.I3, nux, 0.0)
    return euler_to_vector(es, 0.0, params)


THRESHOLD = 2.0 * math.sqrt(1.0 * 9.81 * 0.1 * (0.002 + 1.0 * 0.1**2))
