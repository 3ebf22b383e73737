import numpy as np
import pytest

from glidetop import (EulerState, IntegratorConfig, PhysicalParams, VectorState, checks,
                      euler_to_vector, integrate)
from glidetop.dynamics import (energy_dissipation_rate, total_energy, vector_to_euler,
                               vertical_momentum_rate)


@pytest.fixture(scope="module")
def short_run():
    p = PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.001)
    s = euler_to_vector(EulerState(0.5, 0.8, 4.0, 150.0, 0.06, -0.04), 0.3, p)
    return integrate(s, p, 0.3, IntegratorConfig(t_end=1.0))


def test_fd_oracle_on_energy(short_run):
    y = short_run.y[10]
    fd = checks.fd_rate(y, lambda s: total_energy(s, short_run.params), short_run.params, 0.3)
    exact = energy_dissipation_rate(VectorState.from_array(y), short_run.params, 0.3)
    assert fd == pytest.approx(exact, rel=1e-5)


def test_fd_stencils_agree(short_run):
    y = short_run.y[20]
    q = lambda s: float(s.L[2])
    five = checks.fd_rate(y, q, short_run.params, 0.3, stencil="five")
    central = checks.fd_rate(y, q, short_run.params, 0.3, delta=1e-4, stencil="central")
    assert five == pytest.approx(central, rel=1e-4)
    with pytest.raises(ValueError):
        checks.fd_rate(y, q, short_run.params, 0.3, stencil="bogus")


def test_neighbours_are_time_symmetric(short_run):
    y = short_run.y[5]
    nb = checks.neighbours(y, short_run.params, 0.3, 1e-3, reach=1)
    back = checks.neighbours(nb[1].to_array(), short_run.params, 0.3, 1e-3, reach=1)[-1]
    np.testing.assert_allclose(back.to_array(), y, atol=1e-12)


def test_suites_pass_on_good_run(short_run):
    for suite in (checks.conservation_suite(short_run),
                  checks.dissipation_identity_suite(short_run, 0.3, stride=10),
                  checks.vertical_momentum_suite(short_run, 0.3, stride=10),
                  checks.cross_chart_suite(short_run.params, 0.3, n_samples=200)):
        assert suite.passed, suite
        assert isinstance(suite.as_dict()["passed"], bool)


def test_dissipation_suite_catches_wrong_tip_inertia(short_run):
    bad = PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.001, I1star_override=0.0036)
    traj = integrate(VectorState.from_array(short_run.y[0]), bad, 0.3,
                     IntegratorConfig(t_end=1.0))
    res = checks.dissipation_identity_suite(traj, 0.3, stride=10)
    assert not res.passed
    assert res.metrics["max_rel_error_euler_energy"] > 1e-2
    assert res.metrics["max_rel_error_vector_energy"] < checks.RATE_RTOL


def test_cross_chart_errors_single(params, generic_euler):
    es, phi = generic_euler
    rel, axial, rt = checks.cross_chart_errors(es, phi, params, 0.3)
    assert rel < checks.CHART_RTOL and rt < checks.ROUNDTRIP_TOL and axial < 1e3


def test_classical_limit_suite(params, generic_state):
    traj = integrate(generic_state, params, 0.0, IntegratorConfig(t_end=1.0))
    assert checks.classical_limit_suite(traj).passed
    assert checks.is_frictionless(0.0) and not checks.is_frictionless(0.3)


def test_limit_set_suites(params):
    assert checks.fixed_point_suite(params, 0.3, n_samples=30).passed
    assert checks.zero_reaction_suite(params, 0.3, n_samples=30).passed


@pytest.mark.parametrize("which", ["energy", "Lz"])
def test_fd_converges_at_least_second_order(short_run, which):
    p = short_run.params
    y = short_run.y[30]
    state = VectorState.from_array(y)
    if which == "energy":
        q = lambda s: total_energy(s, p)
        exact = energy_dissipation_rate(state, p, 0.3)
    else:
        q = lambda s: float(s.L[2])
        exact = vertical_momentum_rate(vector_to_euler(state, p)[0], p, 0.3)
    errs = [abs(checks.fd_rate(y, q, p, 0.3, delta=d, n_sub=20, stencil="central") - exact)
            for d in (4e-3, 2e-3, 1e-3)]
    for a, b in zip(errs, errs[1:]):
        assert a / b > 3.5
