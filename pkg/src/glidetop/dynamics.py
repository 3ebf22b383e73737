"""Equations of motion of the gliding Lagrange top in two charts.

Vector chart: ``y = (rdot, L, axis)`` with inertial components; the contact
point ``A`` sits at ``a = -l*axis`` from the centre of mass and the vertical
CM velocity is slaved to the axis motion, ``sdot_z = l * axis_rate . z``.

Euler chart: ``(theta, thetadot, phidot, omega3, nux, nuy)`` with the tip
velocity resolved in the horizontal frame precessing with the axis.  The two
are linked by ``z = -sin(theta) e1 + cos(theta) e3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ChartSingularity, DegenerateDenominator
from .friction import FrictionLike, as_friction
from .params import EPS_DEN, EPS_SING, PhysicalParams
from .state import AXIS, MOMENTUM, RDOT, EulerRate, EulerState, VectorState

AnyState = Union[VectorState, EulerState]


@dataclass(frozen=True)
class MonitoredScalars:
    energy: float
    gn: float
    L3: float
    Lz: float
    LAz: float
    vA_norm: float
    Edot: float


# ---------------------------------------------------------------------------
# kinematics


def angular_velocity(L, axis, params: PhysicalParams) -> np.ndarray:
    """Invert the axisymmetric inertia tensor: split L along and across the axis."""
    L = np.asarray(L, dtype=float)
    axis = np.asarray(axis, dtype=float)
    L3 = L @ axis
    return (L - L3 * axis) / params.I1 + (L3 / params.I3) * axis


def axis_rate(L, axis, params: PhysicalParams) -> np.ndarray:
    return np.cross(L, axis) / params.I1


def gliding_velocity(state: VectorState, params: PhysicalParams) -> np.ndarray:
    """Horizontal velocity of the contact point, ``sdot + omega x a``."""
    omega = angular_velocity(state.L, state.axis, params)
    a = -params.l * state.axis
    sdot_z = params.l * axis_rate(state.L, state.axis, params)[2]
    vA = np.array([state.rdot[0], state.rdot[1], sdot_z]) + np.cross(omega, a)
    return vA[:2]


def vertical_tip_velocity(state: VectorState, params: PhysicalParams) -> float:
    """Residual vertical velocity of the tip; zero up to roundoff and axis drift."""
    omega = angular_velocity(state.L, state.axis, params)
    a = -params.l * state.axis
    sdot_z = params.l * axis_rate(state.L, state.axis, params)[2]
    return float(sdot_z + np.cross(omega, a)[2])


# ---------------------------------------------------------------------------
# reaction force


def _check_denominator(den: float, scale: float, eps_den: float) -> None:
    if not abs(den) >= eps_den * scale:
        raise DegenerateDenominator(den, eps_den * scale)


def normal_force_vector(state: VectorState, params: PhysicalParams, mu: float,
                        eps_den: float = EPS_DEN) -> float:
    m, g, l, I1 = params.m, params.g, params.l, params.I1
    L, axis = state.L, state.axis
    az = axis[2]
    L3 = float(L @ axis)
    vA = gliding_velocity(state, params)
    vA3 = vA[0] * axis[0] + vA[1] * axis[1]
    num = m * g * I1**2 + m * l * (L3 * L[2] - az * float(L @ L))
    den = I1**2 + m * l**2 * I1 * (1.0 - az**2) + m * l**2 * I1 * mu * az * vA3
    _check_denominator(den, I1**2, eps_den)
    return num / den


def normal_force_euler(state: EulerState, params: PhysicalParams, mu: float,
                       eps_den: float = EPS_DEN) -> float:
    m, g, l, I1, I3 = params.m, params.g, params.l, params.I1, params.I3
    s, c = math.sin(state.theta), math.cos(state.theta)
    tdot, pdot = state.thetadot, state.phidot
    num = m * g * I1 - m * l * (I1 * c * (tdot**2 + pdot**2 * s**2)
                                - I3 * state.omega3 * pdot * s**2)
    den = I1 + m * l**2 * s**2 + m * l**2 * mu * state.nux * s * c
    _check_denominator(den, I1, eps_den)
    return num / den


# ---------------------------------------------------------------------------
# right-hand sides


def rhs(y: np.ndarray, params: PhysicalParams, mu: float,
        eps_den: float = EPS_DEN) -> tuple[np.ndarray, float]:
    """Packed vector-chart vector field; returns ``(ydot, gn)``.

    Written on scalars because the integrator calls it several million times.
    """
    vx, vy, Lx, Ly, Lz, ax, ay, az = y.tolist()
    m, g, l, I1 = params.m, params.g, params.l, params.I1
    dax = (Ly * az - Lz * ay) / I1
    day = (Lz * ax - Lx * az) / I1
    dvx = vx - l * dax
    dvy = vy - l * day
    L3 = Lx * ax + Ly * ay + Lz * az
    L2 = Lx * Lx + Ly * Ly + Lz * Lz
    ml2I1 = m * l * l * I1
    den = I1 * I1 + ml2I1 * (1.0 - az * az) + ml2I1 * mu * az * (dvx * ax + dvy * ay)
    if not abs(den) >= eps_den * I1 * I1:
        raise DegenerateDenominator(den, eps_den * I1 * I1)
    gn = (m * g * I1 * I1 + m * l * (L3 * Lz - az * L2)) / den
    Fx = -mu * gn * dvx
    Fy = -mu * gn * dvy
    Fz = gn
    out = np.array([
        Fx / m,
        Fy / m,
        -l * (ay * Fz - az * Fy),
        -l * (az * Fx - ax * Fz),
        -l * (ax * Fy - ay * Fx),
        dax,
        day,
        (Lx * ay - Ly * ax) / I1,
    ])
    return out, gn


def mu_at(friction, y: np.ndarray) -> float:
    """Evaluate a friction model on a packed vector state."""
    const = friction.constant
    if const is not None:
        return const
    return friction(VectorState.from_array(y))


def derivatives_vector(state: VectorState, params: PhysicalParams,
                       friction: FrictionLike,
                       eps_den: float = EPS_DEN) -> tuple[VectorState, float]:
    """Rates ``(rddot, Ldot, axisdot)`` packed as a VectorState, plus g_n."""
    friction = as_friction(friction)
    ydot, gn = rhs(state.to_array(), params, friction(state), eps_den)
    return VectorState(ydot[RDOT], ydot[MOMENTUM], ydot[AXIS]), gn


def derivatives_euler(state: EulerState, params: PhysicalParams,
                      friction: FrictionLike,
                      eps_den: float = EPS_DEN,
                      eps_sing: float = EPS_SING) -> tuple[EulerRate, float]:
    m, l, I1, I3 = params.m, params.l, params.I1, params.I3
    s, c = math.sin(state.theta), math.cos(state.theta)
    if abs(s) < eps_sing:
        raise ChartSingularity(s)
    mu = as_friction(friction)(state)
    gn = normal_force_euler(state, params, mu, eps_den)
    td, pd, w3 = state.thetadot, state.phidot, state.omega3
    nx, ny = state.nux, state.nuy
    thetaddot = (I1 * pd**2 * s * c - I3 * w3 * pd * s + l * mu * gn * nx * c
                 + l * gn * s) / I1
    phiddot = (I3 * w3 * td - 2.0 * I1 * td * pd * c + l * mu * gn * ny) / (I1 * s)
    nuxdot = (l * s / I1 * (I3 * w3 * pd * c + I1 * (td**2 + pd**2 * s**2) - l * gn * c)
              - mu * gn * nx / (m * I1) * (I1 + m * l**2 * c**2)
              + ny * pd)
    nuydot = (-l * I3 * w3 * td / I1
              - params.I1star / (m * I1) * mu * gn * ny
              - nx * pd)
    return EulerRate(td, thetaddot, phiddot, 0.0, nuxdot, nuydot), gn


# ---------------------------------------------------------------------------
# chart maps


def _frame(theta: float, phi: float):
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    e1 = np.array([ct * cp, ct * sp, -st])
    e2 = np.array([-sp, cp, 0.0])
    e3 = np.array([st * cp, st * sp, ct])
    return e1, e2, e3


def euler_to_vector(state: EulerState, phi: float, params: PhysicalParams) -> VectorState:
    """Map an Euler-chart state at azimuth ``phi`` to the vector chart."""
    e1, e2, e3 = _frame(state.theta, phi)
    s = math.sin(state.theta)
    L = (params.I1 * (-state.phidot * s) * e1 + params.I1 * state.thetadot * e2
         + params.I3 * state.omega3 * e3)
    axisdot = state.thetadot * e1 + state.phidot * s * e2
    xhat, yhat = np.array([math.cos(phi), math.sin(phi)]), e2[:2]
    vA = state.nux * xhat + state.nuy * yhat
    rdot = vA + params.l * axisdot[:2]
    return VectorState(rdot, L, e3)


def vector_to_euler(state: VectorState, params: PhysicalParams,
                    eps_sing: float = EPS_SING) -> tuple[EulerState, float]:
    """Inverse chart map; returns ``(EulerState, phi)``."""
    axis = state.axis / np.linalg.norm(state.axis)
    rho = math.hypot(axis[0], axis[1])
    if rho < eps_sing:
        raise ChartSingularity(rho)
    theta = math.atan2(rho, axis[2])
    phi = math.atan2(axis[1], axis[0])
    e1, e2, _ = _frame(theta, phi)
    axisdot = np.cross(state.L, axis) / params.I1
    thetadot = float(axisdot @ e1)
    phidot = float(axisdot @ e2) / math.sin(theta)
    omega3 = float(state.L @ axis) / params.I3
    vA = state.rdot - params.l * axisdot[:2]
    nux = vA[0] * math.cos(phi) + vA[1] * math.sin(phi)
    nuy = float(vA @ e2[:2])
    return EulerState(theta, thetadot, phidot, omega3, float(nux), nuy), phi


def euler_rate_from_vector(state: VectorState, rate: VectorState,
                           params: PhysicalParams,
                           eps_sing: float = EPS_SING) -> EulerRate:
    """Push a vector-chart rate through the chart map (its tangent map)."""
    es, phi = vector_to_euler(state, params, eps_sing)
    e1, e2, e3 = _frame(es.theta, phi)
    s, c = math.sin(es.theta), math.cos(es.theta)
    axisddot = (np.cross(rate.L, state.axis) + np.cross(state.L, rate.axis)) / params.I1
    thetaddot = float(axisddot @ e1) + es.phidot**2 * s * c
    phiddot = (float(axisddot @ e2) - 2.0 * es.phidot * es.thetadot * c) / s
    omega3dot = (float(rate.L @ state.axis) + float(state.L @ rate.axis)) / params.I3
    vAdot = rate.rdot - params.l * axisddot[:2]
    xhat, yhat = np.array([math.cos(phi), math.sin(phi)]), e2[:2]
    nuxdot = float(vAdot @ xhat) + es.phidot * es.nuy
    nuydot = float(vAdot @ yhat) - es.phidot * es.nux
    return EulerRate(es.thetadot, thetaddot, phiddot, omega3dot, nuxdot, nuydot)


# ---------------------------------------------------------------------------
# monitored quantities


def total_energy(state: AnyState, params: PhysicalParams) -> float:
    m, g, l = params.m, params.g, params.l
    if isinstance(state, EulerState):
        s, c = math.sin(state.theta), math.cos(state.theta)
        td, pd = state.thetadot, state.phidot
        return (0.5 * m * (state.nux**2 + state.nuy**2)
                + m * l * (state.nux * td * c + state.nuy * pd * s)
                + 0.5 * (params.I1star * (td**2 + pd**2 * s**2) + params.I3 * state.omega3**2)
                + m * g * l * c)
    omega = angular_velocity(state.L, state.axis, params)
    sdot_z = l * axis_rate(state.L, state.axis, params)[2]
    kinetic = 0.5 * m * (state.rdot @ state.rdot + sdot_z**2) + 0.5 * float(omega @ state.L)
    return float(kinetic + m * g * l * state.axis[2])


def _mu_gn(state: AnyState, params, friction, eps_den):
    mu = as_friction(friction)(state)
    if isinstance(state, EulerState):
        return mu, normal_force_euler(state, params, mu, eps_den)
    return mu, normal_force_vector(state, params, mu, eps_den)


def energy_dissipation_rate(state: AnyState, params: PhysicalParams,
                            friction: FrictionLike, eps_den: float = EPS_DEN) -> float:
    """``-mu * g_n * |v_A|**2``."""
    mu, gn = _mu_gn(state, params, friction, eps_den)
    if isinstance(state, EulerState):
        vA2 = state.nux**2 + state.nuy**2
    else:
        vA = gliding_velocity(state, params)
        vA2 = float(vA @ vA)
    return -mu * gn * vA2


def angular_momentum_scalars(state: AnyState, params: PhysicalParams) -> tuple[float, float, float]:
    """``(L.axis, L.z, L_A.z)`` with ``L_A = L + m a x (omega x a)``."""
    if isinstance(state, EulerState):
        s, c = math.sin(state.theta), math.cos(state.theta)
        L3 = params.I3 * state.omega3
        return (L3,
                params.I1 * state.phidot * s**2 + L3 * c,
                params.I1star * state.phidot * s**2 + L3 * c)
    L, axis = state.L, state.axis
    L3 = float(L @ axis)
    Lz = float(L[2])
    L_perp_z = Lz - L3 * axis[2]
    LAz = Lz + params.m * params.l**2 * L_perp_z / params.I1
    return L3, Lz, LAz


def vertical_momentum_rate(state: EulerState, params: PhysicalParams,
                           friction: FrictionLike, eps_den: float = EPS_DEN) -> float:
    """Rate of L.z, ``l * mu * g_n * nuy * sin(theta)``."""
    mu, gn = _mu_gn(state, params, friction, eps_den)
    return params.l * mu * gn * state.nuy * math.sin(state.theta)


def monitored_scalars(y: np.ndarray, params: PhysicalParams, mu: float,
                      eps_den: float = EPS_DEN) -> MonitoredScalars:
    state = VectorState.from_array(y)
    gn = normal_force_vector(state, params, mu, eps_den)
    vA = gliding_velocity(state, params)
    vA2 = float(vA @ vA)
    L3, Lz, LAz = angular_momentum_scalars(state, params)
    return MonitoredScalars(
        energy=total_energy(state, params),
        gn=gn,
        L3=L3,
        Lz=Lz,
        LAz=LAz,
        vA_norm=math.sqrt(vA2),
        Edot=-mu * gn * vA2,
    )
