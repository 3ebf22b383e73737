"""Invariant suites: numerical evidence that a configuration behaves as the
equations of motion promise.

Each suite returns a :class:`SuiteResult` carrying pass/fail and the measured
figures.  Rates are compared against finite differences taken along short
RK4 re-integrations started from trajectory samples, so the comparison never
reuses the closed-form rate being checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis
from .dynamics import (derivatives_euler, derivatives_vector, energy_dissipation_rate,
                       euler_rate_from_vector, euler_to_vector, mu_at, rhs, total_energy,
                       vector_to_euler, vertical_momentum_rate, vertical_tip_velocity)
from .errors import ChartSingularity
from .friction import FrictionLike, as_friction
from .params import EPS_SING, PhysicalParams
from .state import EulerState, VectorState
from .trajectory import TerminationKind, Trajectory

RATE_RTOL = 1e-5
CHART_RTOL = 1e-9
ROUNDTRIP_TOL = 1e-10
DRIFT_RTOL = 1e-8
AXIS_TOL = 1e-9
VERTICAL_TIP_TOL = 1e-9

_FIVE_POINT = {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}


@dataclass
class SuiteResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    skipped: bool = False

    def __post_init__(self):
        self.passed = bool(self.passed)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "skipped": self.skipped,
                "metrics": self.metrics}


# ---------------------------------------------------------------------------
# finite-difference oracle


def _rk4(y, h, params, friction):
    def f(v):
        return rhs(v, params, mu_at(friction, v))[0]

    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def neighbours(y: np.ndarray, params: PhysicalParams, friction: FrictionLike,
               delta: float, n_sub: int = 10, reach: int = 2) -> dict[int, VectorState]:
    """States at ``t + j*delta`` for ``|j| <= reach``, by RK4 both ways."""
    friction = as_friction(friction)
    out = {0: VectorState.from_array(y)}
    for sign in (1, -1):
        v = np.asarray(y, dtype=float).copy()
        for j in range(1, reach + 1):
            for _ in range(n_sub):
                v = _rk4(v, sign * delta / n_sub, params, friction)
            out[sign * j] = VectorState.from_array(v)
    return out


def fd_rate(y: np.ndarray, quantity: Callable[[VectorState], float],
            params: PhysicalParams, friction: FrictionLike, delta: float = 1e-3,
            n_sub: int = 10, stencil: str = "five") -> float:
    """Finite-difference time derivative of ``quantity`` along the flow from ``y``."""
    if stencil == "five":
        states = neighbours(y, params, friction, delta, n_sub, reach=2)
        return sum(w * quantity(states[j]) for j, w in _FIVE_POINT.items()) / delta
    if stencil == "central":
        states = neighbours(y, params, friction, delta, n_sub, reach=1)
        return (quantity(states[1]) - quantity(states[-1])) / (2.0 * delta)
    raise ValueError(f"unknown stencil {stencil!r}")


def euler_energy(state: VectorState, params: PhysicalParams) -> float:
    es, _ = vector_to_euler(state, params)
    return total_energy(es, params)


# ---------------------------------------------------------------------------
# suites


def random_interior_state(rng: np.random.Generator, params: PhysicalParams,
                          margin: float = 0.05) -> tuple[EulerState, float]:
    spin = 2.0 * params.upright_threshold / params.I3
    es = EulerState(
        theta=rng.uniform(margin, math.pi - margin),
        thetadot=rng.normal(0.0, 3.0),
        phidot=rng.normal(0.0, 3.0),
        omega3=rng.normal(0.0, spin),
        nux=rng.normal(0.0, 0.3),
        nuy=rng.normal(0.0, 0.3),
    )
    return es, rng.uniform(-math.pi, math.pi)


def cross_chart_errors(es: EulerState, phi: float, params: PhysicalParams,
                       friction: FrictionLike) -> tuple[float, float, float]:
    """``(max component rel. error, axial-rate error / roundoff scale, round trip)``.

    The axial spin rate is identically zero in the Euler chart, so its
    pushforward is judged against the size of the terms that cancel in it.
    """
    friction = as_friction(friction)
    vs = euler_to_vector(es, phi, params)
    back, phi_back = vector_to_euler(vs, params)
    dphi = math.remainder(phi_back - phi, 2 * math.pi)
    roundtrip = max(float(np.max(np.abs(back.to_array() - es.to_array()))), abs(dphi))

    rate, _ = derivatives_vector(vs, params, friction)
    pushed = euler_rate_from_vector(vs, rate, params).to_array()
    direct = derivatives_euler(es, params, friction)[0].to_array()
    rel = 0.0
    for k in (0, 1, 2, 4, 5):
        denom = max(abs(pushed[k]), abs(direct[k]))
        if denom > 0:
            rel = max(rel, abs(pushed[k] - direct[k]) / denom)
    scale = (np.linalg.norm(rate.L) * np.linalg.norm(vs.axis)
             + np.linalg.norm(vs.L) * np.linalg.norm(rate.axis)) / params.I3
    axial = abs(pushed[3] - direct[3]) / max(scale * np.finfo(float).eps, 1e-300)
    return rel, float(axial), roundtrip


def cross_chart_suite(params: PhysicalParams, friction: FrictionLike,
                      n_samples: int = 10_000, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rel = axial = rt = 0.0
    for _ in range(n_samples):
        es, phi = random_interior_state(rng, params)
        r, a, t = cross_chart_errors(es, phi, params, friction)
        rel, axial, rt = max(rel, r), max(axial, a), max(rt, t)
    passed = rel < CHART_RTOL and rt < ROUNDTRIP_TOL and axial < 1e3
    return SuiteResult("cross_chart", passed, {
        "n_samples": n_samples, "max_rate_rel_error": rel,
        "axial_rate_error_ulps": axial, "max_roundtrip_error": rt})


def energy_tolerance(traj: Trajectory) -> float:
    return 1e-8 * (1.0 + abs(float(traj.energy[0])))


def conservation_suite(traj: Trajectory) -> SuiteResult:
    """Axial momentum, monotone energy, unit axis and tip-in-plane along a run."""
    params = traj.params
    L3 = traj.column("L3")
    L3_drift = float(np.max(np.abs(L3 - L3[0])))
    L3_rel = L3_drift / abs(L3[0]) if L3[0] != 0 else L3_drift
    E = traj.energy
    max_increase = float(np.max(np.diff(E))) if len(E) > 1 else 0.0
    axis_err = float(np.max(np.abs(np.linalg.norm(traj.axis, axis=1) - 1.0)))
    vAz = max(abs(vertical_tip_velocity(VectorState.from_array(y), params)) for y in traj.y)
    gn = traj.gn
    if traj.termination.kind is TerminationKind.CONTACT_LOSS:
        gn = gn[:-1]
    min_gn = float(np.min(gn)) if len(gn) else 0.0
    passed = (L3_rel < DRIFT_RTOL and max_increase <= energy_tolerance(traj)
              and axis_err < AXIS_TOL and vAz < VERTICAL_TIP_TOL and min_gn >= 0.0)
    return SuiteResult("conservation", passed, {
        "L3_abs_drift": L3_drift, "L3_rel_drift": L3_rel,
        "max_energy_increase": max_increase, "energy_tolerance": energy_tolerance(traj),
        "max_axis_norm_error": axis_err, "max_vertical_tip_velocity": vAz,
        "min_gn_before_event": min_gn})


def dissipation_identity_suite(traj: Trajectory, friction: FrictionLike,
                               delta: float = 1e-3, n_sub: int = 10, stride: int = 1,
                               vA_min: float = 1e-3) -> SuiteResult:
    """Finite-difference dE/dt against ``-mu g_n |v_A|**2`` in both charts.

    The Euler-chart energy is the closed form in angles and rates (it carries
    ``I1star``); the vector-chart energy is kinetic plus potential directly.
    """
    friction = as_friction(friction)
    params = traj.params
    worst = {"vector": 0.0, "euler": 0.0}
    n_used = 0
    vA = traj.column("vA_norm")
    for i in range(0, len(traj), stride):
        if vA[i] <= vA_min:
            continue
        y = traj.y[i]
        state = VectorState.from_array(y)
        if math.hypot(y[5], y[6]) < 10 * EPS_SING:
            continue
        expected = energy_dissipation_rate(state, params, friction)
        states = neighbours(y, params, friction, delta, n_sub)
        for chart, energy in (("vector", total_energy), ("euler", euler_energy)):
            try:
                fd = sum(w * energy(states[j], params) for j, w in _FIVE_POINT.items()) / delta
            except ChartSingularity:
                continue
            worst[chart] = max(worst[chart], abs(fd - expected) / abs(expected))
        n_used += 1
    passed = n_used > 0 and max(worst.values()) < RATE_RTOL
    return SuiteResult("dissipation_identity", passed, {
        "n_samples": n_used, "max_rel_error_vector_energy": worst["vector"],
        "max_rel_error_euler_energy": worst["euler"], "tolerance": RATE_RTOL})


def vertical_momentum_suite(traj: Trajectory, friction: FrictionLike,
                            delta: float = 1e-3, n_sub: int = 10, stride: int = 1,
                            nuy_min: float = 1e-3) -> SuiteResult:
    """Finite-difference d(L.z)/dt against ``l mu g_n nuy sin(theta)``."""
    friction = as_friction(friction)
    params = traj.params
    worst, n_used = 0.0, 0
    for i in range(0, len(traj), stride):
        y = traj.y[i]
        try:
            es, _ = vector_to_euler(VectorState.from_array(y), params)
        except ChartSingularity:
            continue
        if abs(es.nuy) <= nuy_min:
            continue
        expected = vertical_momentum_rate(es, params, friction)
        if expected == 0.0:
            continue
        fd = fd_rate(y, lambda s: float(s.L[2]), params, friction, delta, n_sub)
        worst = max(worst, abs(fd - expected) / abs(expected))
        n_used += 1
    passed = n_used > 0 and worst < RATE_RTOL
    return SuiteResult("vertical_momentum_rate", passed, {
        "n_samples": n_used, "max_rel_error": worst, "tolerance": RATE_RTOL})


def classical_limit_suite(traj: Trajectory) -> SuiteResult:
    """Frictionless run: energy and L.z drift."""
    E, Lz = traj.energy, traj.column("Lz")
    e_drift = float(np.max(np.abs(E - E[0]))) / abs(E[0])
    lz_scale = abs(Lz[0]) if Lz[0] != 0 else 1.0
    lz_drift = float(np.max(np.abs(Lz - Lz[0]))) / lz_scale
    passed = e_drift < DRIFT_RTOL and lz_drift < DRIFT_RTOL
    return SuiteResult("classical_limit", passed, {
        "energy_rel_drift": e_drift, "Lz_rel_drift": lz_drift, "tolerance": DRIFT_RTOL})


def fixed_point_suite(params: PhysicalParams, friction: FrictionLike, n_samples: int = 1000,
                 seed: int = 0) -> SuiteResult:
    rep = analysis.verify_fixed_point_family(params, friction, n_samples, seed)
    return SuiteResult("fixed_points", rep.passed, rep.as_dict())


def zero_reaction_suite(params: PhysicalParams, friction: FrictionLike, n_samples: int = 1000,
                 seed: int = 0) -> SuiteResult:
    rep = analysis.verify_no_gn_zero_solutions(params, n_samples, seed, friction=friction)
    return SuiteResult("no_zero_reaction_solutions", rep.passed, rep.as_dict())


def is_frictionless(friction: FrictionLike) -> bool:
    return as_friction(friction).constant == 0.0
