import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from glidetop import (ChartSingularity, DegenerateDenominator, EulerState, PhysicalParams,
                      VectorState, derivatives_euler, derivatives_vector, euler_to_vector,
                      normal_force_euler, normal_force_vector, total_energy, vector_to_euler)
from glidetop.dynamics import (angular_momentum_scalars, angular_velocity,
                               energy_dissipation_rate, euler_rate_from_vector,
                               gliding_velocity, monitored_scalars, rhs,
                               vertical_momentum_rate, vertical_tip_velocity)

PARAMS = PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.001)


def newton_euler_gn(state: VectorState, p: PhysicalParams, mu: float) -> float:
    """Reaction force from rigid-body mechanics with a full inertia tensor.

    The tip height ``z_cm - l*axis_z`` stays zero, so ``m*(g + l*axis_z'') = g_n``.
    ``axis''`` follows from Euler's equations with contact force
    ``(-mu g_n vA, g_n)`` applied at ``-l*axis``.  The relation is affine in
    ``g_n``, so two trial values fix it.
    """
    e = state.axis
    inertia = p.I1 * (np.eye(3) - np.outer(e, e)) + p.I3 * np.outer(e, e)
    omega = np.linalg.solve(inertia, state.L)
    vA = np.append(gliding_velocity(state, p), 0.0)

    def residual(gn):
        force = np.array([-mu * gn * vA[0], -mu * gn * vA[1], gn])
        torque = np.cross(-p.l * e, force)
        # d(I w)/dt = torque with I rotating: I w' = torque - w x (I w)
        wdot = np.linalg.solve(inertia, torque - np.cross(omega, inertia @ omega))
        edd = np.cross(wdot, e) + np.cross(omega, np.cross(omega, e))
        return p.m * (p.g + p.l * edd[2]) - gn

    r0, r1 = residual(0.0), residual(1.0)
    return r0 / (r0 - r1)


states = st.builds(
    EulerState,
    theta=st.floats(0.05, math.pi - 0.05),
    thetadot=st.floats(-5, 5),
    phidot=st.floats(-10, 10),
    omega3=st.floats(-400, 400),
    nux=st.floats(-0.5, 0.5),
    nuy=st.floats(-0.5, 0.5),
)
phis = st.floats(-math.pi, math.pi)
mus = st.floats(0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(states, phis, mus)
def test_reaction_force_matches_newton_euler(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        gn = normal_force_vector(vs, PARAMS, mu)
    except DegenerateDenominator:
        return
    oracle = newton_euler_gn(vs, PARAMS, mu)
    assert gn == pytest.approx(oracle, rel=1e-9, abs=1e-9 * PARAMS.m * PARAMS.g)


@settings(max_examples=200, deadline=None)
@given(states, phis, mus)
def test_reaction_force_same_in_both_charts(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        a = normal_force_vector(vs, PARAMS, mu)
        b = normal_force_euler(es, PARAMS, mu)
    except DegenerateDenominator:
        return
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(states, phis)
def test_chart_roundtrip(es, phi):
    vs = euler_to_vector(es, phi, PARAMS)
    back, phi2 = vector_to_euler(vs, PARAMS)
    assert_allclose(back.to_array(), es.to_array(), rtol=1e-10, atol=1e-10)
    assert math.remainder(phi2 - phi, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(states, phis, mus)
def test_rates_agree_across_charts(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        rate, _ = derivatives_vector(vs, PARAMS, mu)
        direct, _ = derivatives_euler(es, PARAMS, mu)
    except DegenerateDenominator:
        return
    pushed = euler_rate_from_vector(vs, rate, PARAMS)
    a, b = pushed.to_array(), direct.to_array()
    floor = 1e-12 * (np.max(np.abs(b)) + 1.0)
    assert np.all(np.abs(a - b) <= 1e-8 * (np.abs(a) + np.abs(b)) + floor)


@settings(max_examples=100, deadline=None)
@given(states, phis, mus)
def test_energy_and_momenta_agree_across_charts(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    assert total_energy(vs, PARAMS) == pytest.approx(total_energy(es, PARAMS), rel=1e-12)
    assert_allclose(angular_momentum_scalars(vs, PARAMS), angular_momentum_scalars(es, PARAMS),
                    rtol=1e-10, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(states, phis)
def test_tip_stays_on_plane(es, phi):
    vs = euler_to_vector(es, phi, PARAMS)
    assert abs(vertical_tip_velocity(vs, PARAMS)) < 1e-12


def test_energy_by_hand():
    # resting tilt, no motion: potential only, z_cm = l cos(theta)
    es = EulerState(0.4, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert total_energy(es, PARAMS) == pytest.approx(9.81 * 0.1 * math.cos(0.4), rel=1e-15)
    # pure axial spin at the upright: L3^2 / (2 I3) + m g l
    vs = VectorState.upright(0.2)
    assert total_energy(vs, PARAMS) == pytest.approx(0.2**2 / 0.002 + 0.981, rel=1e-15)


def test_angular_velocity_inverts_inertia():
    axis = np.array([0.0, 0.6, 0.8])
    omega = np.array([1.0, -2.0, 3.0])
    inertia = 0.002 * (np.eye(3) - np.outer(axis, axis)) + 0.001 * np.outer(axis, axis)
    assert_allclose(angular_velocity(inertia @ omega, axis, PARAMS), omega, rtol=1e-13)


@pytest.mark.parametrize("state", [VectorState.upright(0.3), VectorState.inverted(0.3),
                                   VectorState.upright(0.0)])
def test_vertical_spin_is_rest_point(state):
    ydot, gn = rhs(state.to_array(), PARAMS, 0.3)
    assert np.max(np.abs(ydot)) == 0.0
    assert gn == pytest.approx(PARAMS.m * PARAMS.g, rel=1e-15)


def test_dissipation_rate_sign(generic_state, params):
    assert energy_dissipation_rate(generic_state, params, 0.3) < 0
    assert energy_dissipation_rate(generic_state, params, 0.0) == 0.0


def test_vertical_momentum_rate_closed_form(generic_euler, params):
    es, _ = generic_euler
    gn = normal_force_euler(es, params, 0.3)
    expected = 0.1 * 0.3 * gn * es.nuy * math.sin(es.theta)
    assert vertical_momentum_rate(es, params, 0.3) == pytest.approx(expected, rel=1e-15)


def test_vertical_momentum_rate_matches_vector_rhs(generic_euler, params):
    es, phi = generic_euler
    vs = euler_to_vector(es, phi, params)
    ydot, _ = rhs(vs.to_array(), params, 0.3)
    assert ydot[4] == pytest.approx(vertical_momentum_rate(es, params, 0.3), rel=1e-10)


def test_chart_singularity_raised(params):
    with pytest.raises(ChartSingularity):
        vector_to_euler(VectorState.upright(0.2), params)
    with pytest.raises(ChartSingularity):
        derivatives_euler(EulerState(0.0, 0, 0, 1.0, 0, 0), params, 0.3)


def test_degenerate_denominator_raised(generic_state, params):
    with pytest.raises(DegenerateDenominator):
        rhs(generic_state.to_array(), params, 0.3, eps_den=100.0)
    with pytest.raises(DegenerateDenominator):
        normal_force_vector(generic_state, params, 0.3, eps_den=100.0)


def test_monitored_scalars_consistent(generic_state, params):
    sc = monitored_scalars(generic_state.to_array(), params, 0.3)
    assert sc.energy == total_energy(generic_state, params)
    assert sc.Edot == pytest.approx(-0.3 * sc.gn * sc.vA_norm**2, rel=1e-15)
    assert sc.L3 == pytest.approx(generic_state.L @ generic_state.axis, rel=1e-15)


def test_i1star_enters_tip_momentum():
    es = EulerState(0.7, 0.0, 2.0, 10.0, 0.0, 0.0)
    L3, Lz, LAz = angular_momentum_scalars(es, PARAMS)
    s, c = math.sin(0.7), math.cos(0.7)
    assert Lz == pytest.approx(0.002 * 2.0 * s**2 + L3 * c, rel=1e-14)
    assert LAz == pytest.approx(0.012 * 2.0 * s**2 + L3 * c, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(states, phis, mus)
def test_axial_momentum_has_zero_rate(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        rate, _ = derivatives_vector(vs, PARAMS, mu)
    except DegenerateDenominator:
        return
    assert abs(rate.L @ vs.axis + vs.L @ rate.axis) < 1e-12


@settings(max_examples=200, deadline=None)
@given(states, phis, mus)
def test_dissipation_sign(es, phi, mu):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        gn = normal_force_vector(vs, PARAMS, mu)
    except DegenerateDenominator:
        return
    if gn >= 0:
        assert energy_dissipation_rate(vs, PARAMS, mu) <= 0.0


@settings(max_examples=100, deadline=None)
@given(states, phis)
def test_frictionless_rates_vanish(es, phi):
    vs = euler_to_vector(es, phi, PARAMS)
    try:
        ydot, _ = rhs(vs.to_array(), PARAMS, 0.0)
    except DegenerateDenominator:
        return
    assert ydot[4] == 0.0
    assert energy_dissipation_rate(vs, PARAMS, 0.0) == 0.0
