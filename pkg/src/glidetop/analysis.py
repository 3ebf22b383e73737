"""Asymptotics of the gliding top: stability of the vertical spins and
numerical checks of which states can be limits.

Stability uses the angle-dependent part of the energy,

    E2(c) = L3**2/(2 I3) + (LAz - L3 c)**2 / (2 I1* (1 - c**2)) + m g l c,

with ``c = cos(theta)``.  At ``c = +1`` (``-1``) the curvature in theta is
``-E2'(c)`` (``+E2'(c)``), so only the one-sided slope at the boundary is
needed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import (euler_to_vector, gliding_velocity,
                       normal_force_vector, rhs)
from .errors import RootFindFailure
from .friction import FrictionLike, as_friction
from .params import PhysicalParams
from .state import EulerState, VectorState
from .trajectory import Limit, TerminationKind, Trajectory


@dataclass(frozen=True)
class ConvergenceCriteria:
    tol_v: float = 1e-4
    tol_axis: float = 1e-5
    window: int = 20

    def __post_init__(self):
        if not (self.tol_v > 0 and self.tol_axis > 0):
            raise ValueError("convergence tolerances must be positive")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError("convergence window must be a positive integer")


@dataclass(frozen=True)
class ConvergenceResult:
    limit: Limit
    t_converged: float
    residuals: tuple[float, float, float]

    def as_dict(self) -> dict:
        vA, transverse, axis = self.residuals
        return {
            "limit": self.limit.value,
            "t_converged": None if math.isnan(self.t_converged) else self.t_converged,
            "residuals": {"vA": vA, "transverse_rate": transverse, "axis": axis},
        }


@dataclass(frozen=True)
class StabilityReport:
    L_A3: float
    threshold: float
    upright_stable: bool
    inverted_stable: bool
    e2_curvature_up: float
    e2_curvature_down: float

    def as_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# effective energy


def effective_energy(cos_theta: float, LAz: float, L3: float, params: PhysicalParams) -> float:
    c = float(cos_theta)
    if abs(c) > 1.0:
        raise ValueError(f"cos(theta)={c} outside [-1, 1]")
    base = L3**2 / (2.0 * params.I3) + params.mgl * c
    if abs(c) == 1.0:
        if LAz - L3 * c != 0.0:
            raise ValueError("effective energy has a pole at |cos(theta)| = 1 "
                             "unless LAz = L3*cos(theta)")
        return base
    return base + (LAz - L3 * c) ** 2 / (2.0 * params.I1star * (1.0 - c * c))


def e2_boundary_derivative(which: Limit | str, LA3: float, params: PhysicalParams) -> float:
    """Slope dE2/dcos(theta) at the upright (c=1) or inverted (c=-1) end."""
    which = Limit(which)
    quarter = LA3**2 / (4.0 * params.I1star)
    if which is Limit.UPRIGHT:
        return -quarter + params.mgl
    if which is Limit.INVERTED:
        return quarter + params.mgl
    raise ValueError("which must be upright or inverted")


def classify_stability(LA3: float, params: PhysicalParams) -> StabilityReport:
    threshold = params.upright_threshold
    up = e2_boundary_derivative(Limit.UPRIGHT, LA3, params)
    down = e2_boundary_derivative(Limit.INVERTED, LA3, params)
    return StabilityReport(
        L_A3=float(LA3),
        threshold=threshold,
        upright_stable=bool(LA3**2 > 4.0 * params.mgl * params.I1star),
        inverted_stable=bool(down > 0),
        e2_curvature_up=up,
        e2_curvature_down=down,
    )


# ---------------------------------------------------------------------------
# convergence


def convergence_residuals(y: np.ndarray, vA_norm: float,
                          params: PhysicalParams) -> tuple[float, float, float]:
    """``(|v_A|, |L x axis|/I1, 1 - |axis_z|)`` for a packed state."""
    L, axis = y[2:5], y[5:8]
    transverse = float(np.linalg.norm(np.cross(L, axis))) / params.I1
    return vA_norm, transverse, 1.0 - abs(float(axis[2]))


def sample_limit(y: np.ndarray, vA_norm: float, params: PhysicalParams,
                 criteria: ConvergenceCriteria) -> Limit:
    """Which vertical spin (if any) this single sample sits at."""
    vA, transverse, _ = convergence_residuals(y, vA_norm, params)
    if vA >= criteria.tol_v or transverse >= criteria.tol_v / params.l:
        return Limit.UNDETERMINED
    az = float(y[7])
    if az > 1.0 - criteria.tol_axis:
        return Limit.UPRIGHT
    if az < -(1.0 - criteria.tol_axis):
        return Limit.INVERTED
    return Limit.UNDETERMINED


def detect_convergence(traj: Trajectory, tol_v: float = 1e-4, tol_axis: float = 1e-5,
                       window: int = 20) -> ConvergenceResult:
    """First trailing window of ``window`` samples all at the same vertical spin."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    criteria = ConvergenceCriteria(tol_v, tol_axis, window)
    params = traj.params
    vA = traj.column("vA_norm")
    last = convergence_residuals(traj.y[-1], float(vA[-1]), params)
    if traj.termination.kind in (TerminationKind.CONTACT_LOSS,
                                 TerminationKind.DEGENERATE_DENOMINATOR):
        return ConvergenceResult(Limit.UNDETERMINED, math.nan, last)
    run_limit, run_len = None, 0
    for i in range(len(traj)):
        lim = sample_limit(traj.y[i], float(vA[i]), params, criteria)
        if lim is Limit.UNDETERMINED:
            run_limit, run_len = None, 0
            continue
        run_len = run_len + 1 if lim is run_limit else 1
        run_limit = lim
        if run_len >= window:
            res = convergence_residuals(traj.y[i], float(vA[i]), params)
            return ConvergenceResult(lim, float(traj.t[i]), res)
    return ConvergenceResult(Limit.UNDETERMINED, math.nan, last)


def max_tilt(traj: Trajectory) -> float:
    """Largest inclination of the axis from +z over the trajectory (rad)."""
    return float(np.max(np.arccos(np.clip(traj.axis[:, 2], -1.0, 1.0))))


def matched_precession_rate(theta: float, LA3: float, params: PhysicalParams,
                            target: Limit) -> float:
    """Precession rate giving ``L_A.z = +LA3`` (upright) or ``-LA3`` (inverted).

    Those are the values ``L_A.z`` takes at the corresponding vertical spin.
    """
    c = math.cos(theta)
    if target is Limit.UPRIGHT:
        if 1.0 + c <= 0.0:
            raise ValueError("no upright-matched precession at theta = pi")
        return LA3 / (params.I1star * (1.0 + c))
    if target is Limit.INVERTED:
        if 1.0 - c <= 0.0:
            raise ValueError("no inverted-matched precession at theta = 0")
        return -LA3 / (params.I1star * (1.0 - c))
    raise ValueError(f"target must be upright or inverted, got {target!r}")


def launch_state(theta: float, LA3: float, params: PhysicalParams, nux: float = 0.0,
                 nuy: float = 0.0, thetadot: float = 0.0, phidot: float = 0.0,
                 phi: float = 0.0) -> VectorState:
    """Vector state with axial angular momentum ``LA3`` at inclination ``theta``."""
    es = EulerState(theta, thetadot, phidot, LA3 / params.I3, nux, nuy)
    return euler_to_vector(es, phi, params)


# ---------------------------------------------------------------------------
# limit-set checks


@dataclass(frozen=True)
class FixedPointReport:
    n_samples: int
    counterexamples: int
    min_rate_norm: float
    min_departure: float
    vertical_rate_max: float
    vertical_gn_error_max: float

    @property
    def passed(self) -> bool:
        return (self.counterexamples == 0 and self.vertical_rate_max < 1e-14
                and self.vertical_gn_error_max < 1e-12)

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def _rk4_track(y, h, n, params, mu, watch, stop_above=math.inf):
    """Fixed-step RK4 from ``y``; returns max of ``watch(y, gn)`` over the steps.

    Stops early once the watched value exceeds ``stop_above``.
    """
    def f(v):
        return rhs(v, params, mu)

    best = 0.0
    for _ in range(n):
        if best > stop_above:
            break
        k1, _ = f(y)
        k2, _ = f(y + 0.5 * h * k1)
        k3, _ = f(y + 0.5 * h * k2)
        k4, _ = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        _, gn = f(y)
        best = max(best, watch(y, gn))
    return best


def verify_fixed_point_family(params: PhysicalParams, friction: FrictionLike = 0.3,
                              n_samples: int = 1000, seed: int = 0,
                              horizon: float = 1e-3) -> FixedPointReport:
    """Tilted zero-slip states are never rest points and never stay slip-free.

    Each sample has ``v_A = 0`` and ``sin(theta) != 0``.  It counts as a
    counterexample only if both its rate vector vanishes and a short
    integration keeps the tip velocity at zero.  Vertical spins are checked
    to be exact rest points with ``g_n = m g``.
    """
    friction = as_friction(friction)
    rng = np.random.default_rng(seed)
    spin_scale = 2.0 * params.upright_threshold / params.I3
    rate_scale = params.mgl / params.I1
    counter, min_rate, min_dep = 0, math.inf, math.inf
    for _ in range(n_samples):
        theta = rng.uniform(0.05, math.pi - 0.05)
        es = EulerState(theta, rng.normal(0.0, 2.0), rng.normal(0.0, 5.0),
                        rng.normal(0.0, spin_scale), 0.0, 0.0)
        state = euler_to_vector(es, rng.uniform(-math.pi, math.pi), params)
        y = state.to_array()
        mu = friction(state)
        ydot, gn = rhs(y, params, mu)
        rate = float(np.linalg.norm(ydot[2:8]))
        min_rate = min(min_rate, rate)
        dep = _rk4_track(y, horizon / 10, 10, params, mu,
                         lambda v, _gn: float(np.linalg.norm(
                             gliding_velocity(VectorState.from_array(v), params))))
        min_dep = min(min_dep, dep)
        if rate < 1e-12 * rate_scale and dep < 1e-14:
            counter += 1

    vert_rate, vert_gn = 0.0, 0.0
    for sign in (1.0, -1.0):
        for L3 in (0.0, *rng.normal(0.0, spin_scale * params.I3, size=4)):
            state = VectorState.upright(L3) if sign > 0 else VectorState.inverted(L3)
            ydot, gn = rhs(state.to_array(), params, friction(state))
            vert_rate = max(vert_rate, float(np.max(np.abs(ydot))))
            vert_gn = max(vert_gn, abs(gn - params.m * params.g) / (params.m * params.g))
    return FixedPointReport(n_samples, counter, min_rate, min_dep, vert_rate, vert_gn)


def reaction_numerator(state: VectorState, params: PhysicalParams) -> float:
    """Numerator of the reaction-force formula; g_n vanishes with it."""
    L, axis = state.L, state.axis
    return params.m * params.g * params.I1**2 + params.m * params.l * (
        float(L @ axis) * L[2] - axis[2] * float(L @ L))


def numerator_zero_state(axis, Lx: float, Ly: float, params: PhysicalParams,
                         rdot=(0.0, 0.0)) -> VectorState:
    """Solve for L_z placing the state on the zero-reaction manifold.

    The condition ``g I1**2/l + (L.z)(L.axis) = axis_z |L|**2`` is linear in
    ``L_z`` (its quadratic terms cancel); no solution exists when the
    coefficient ``Lx*ax + Ly*ay`` vanishes, which covers ``L = 0`` and
    ``L`` parallel to a vertical axis.
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    ax, ay, az = axis
    coeff = Lx * ax + Ly * ay
    rhs_const = az * (Lx**2 + Ly**2) - params.g * params.I1**2 / params.l
    if abs(coeff) < 1e-12 * max(1.0, abs(rhs_const)):
        raise RootFindFailure("numerator is independent of L_z here; no root")
    Lz = rhs_const / coeff
    return VectorState(np.asarray(rdot, dtype=float), [Lx, Ly, Lz], axis)


@dataclass(frozen=True)
class GnZeroReport:
    n_requested: int
    n_tested: int
    skipped: int
    counterexamples: int
    min_departure: float
    max_initial_gn: float

    @property
    def passed(self) -> bool:
        return self.counterexamples == 0 and self.n_tested > 0

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def verify_no_gn_zero_solutions(params: PhysicalParams, n_samples: int = 1000,
                                seed: int = 0, horizon: float = 1e-2,
                                n_steps: int = 50, friction: FrictionLike = 0.3,
                                departure_tol: float = 1e-6) -> GnZeroReport:
    """Zero-reaction states are not invariant: g_n leaves zero within ``horizon``.

    Samples whose manifold root does not exist or is implausibly large are
    skipped and counted.  ``departure_tol`` is relative to ``m g``.
    """
    friction = as_friction(friction)
    rng = np.random.default_rng(seed)
    L_scale = params.upright_threshold
    mg = params.m * params.g
    tested = skipped = counter = 0
    min_dep, max_gn0 = math.inf, 0.0
    while tested < n_samples:
        if skipped > 10 * n_samples:
            break
        axis = rng.normal(size=3)
        Lx, Ly = rng.normal(0.0, L_scale, size=2)
        rdot = rng.normal(0.0, 0.1, size=2)
        try:
            state = numerator_zero_state(axis, Lx, Ly, params, rdot)
        except RootFindFailure:
            skipped += 1
            continue
        if abs(state.L[2]) > 100 * L_scale:
            skipped += 1
            continue
        mu = friction(state)
        gn0 = normal_force_vector(state, params, mu)
        max_gn0 = max(max_gn0, abs(gn0) / mg)
        dep = _rk4_track(state.to_array(), horizon / n_steps, n_steps, params, mu,
                         lambda v, gn: abs(gn) / mg, stop_above=departure_tol)
        min_dep = min(min_dep, dep)
        tested += 1
        if dep < departure_tol:
            counter += 1
    return GnZeroReport(n_samples, tested, skipped, counter, min_dep, max_gn0)

