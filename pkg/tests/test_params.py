import dataclasses
import math

import pytest

from glidetop import PhysicalParams
from glidetop.friction import CallableFriction, ConstantFriction, as_friction


def test_i1star_is_tip_inertia(params):
    assert params.I1star == pytest.approx(0.002 + 1.0 * 0.1**2, rel=1e-15)


def test_threshold_matches_hand_arithmetic(params):
    # 2*sqrt(1 * 9.81 * 0.1 * 0.012) = 2*sqrt(0.011772)
    assert params.upright_threshold == pytest.approx(0.21699769584, rel=1e-10)
    assert round(params.upright_threshold, 4) == 0.2170


def test_mgl(params):
    assert params.mgl == pytest.approx(0.981)


@pytest.mark.parametrize("field", ["m", "g", "l", "I1", "I3"])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_rejects_nonpositive(field, bad):
    kwargs = dict(m=1.0, g=9.81, l=0.1, I1=0.002, I3=0.001)
    kwargs[field] = bad
    with pytest.raises(ValueError):
        PhysicalParams(**kwargs)


def test_rejects_non_physical_inertia():
    with pytest.raises(ValueError):
        PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.0041)


def test_override_changes_i1star_only():
    p = PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.001, I1star_override=0.005)
    assert p.I1star == 0.005
    assert p.I1 == 0.002
    assert p.as_dict()["I1star_override"] == 0.005


def test_frozen(params):
    with pytest.raises(dataclasses.FrozenInstanceError):
        params.m = 2.0


def test_constant_friction():
    f = ConstantFriction(0.3)
    assert f(None) == 0.3
    assert f.constant == 0.3
    with pytest.raises(ValueError):
        ConstantFriction(-0.1)


def test_as_friction_wraps_numbers_and_callables():
    assert as_friction(0.2).constant == 0.2
    f = as_friction(lambda state: 0.4)
    assert isinstance(f, CallableFriction)
    assert f(None) == 0.4
    assert f.constant is None
    same = ConstantFriction(0.1)
    assert as_friction(same) is same
