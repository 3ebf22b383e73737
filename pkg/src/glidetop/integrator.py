"""Adaptive Dormand-Prince 5(4) integration of the vector-chart equations.

Accepted steps are followed by renormalisation of the symmetry axis.  Output
comes from the 4th-order continuous extension on a fixed sample grid.  A sign
change of the reaction force ends the run as contact loss.  An optional
convergence predicate stops the run once a vertical spin is reached.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, fields

import numpy as np
from scipy.optimize import brentq

from .analysis import ConvergenceCriteria, sample_limit
from .dynamics import monitored_scalars, mu_at, rhs
from .errors import DegenerateDenominator
from .friction import FrictionLike, as_friction
from .params import EPS_DEN, PhysicalParams
from .state import AXIS, VectorState
from .trajectory import Limit, Termination, TerminationKind, Trajectory


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    h_init: float = 1e-4
    h_max: float = 1e-2
    t_end: float = 10.0
    sample_dt: float = 1e-2
    eps_den: float = EPS_DEN
    event_tol: float = 1e-13

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"integrator.{f.name} must be positive, got {value!r}")


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A2 = (1 / 5,)
_A3 = (3 / 40, 9 / 40)
_A4 = (44 / 45, -56 / 15, 32 / 9)
_A5 = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A6 = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# Hairer's continuous extension (order 4)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
      -10690763975 / 1880347072, 701980252875 / 199316789632,
      -1453857185 / 822651844, 69997945 / 29380423)

_SAFE = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA


class _Dense:
    """Interpolant over one accepted step ``[t0, t0 + h]``."""

    __slots__ = ("t0", "h", "r1", "r2", "r3", "r4", "r5")

    def __init__(self, t0, h, y0, y1, k):
        ydiff = y1 - y0
        bspl = h * k[0] - ydiff
        self.t0, self.h = t0, h
        self.r1 = y0
        self.r2 = ydiff
        self.r3 = bspl
        self.r4 = ydiff - h * k[6] - bspl
        self.r5 = h * (_D[0] * k[0] + _D[2] * k[2] + _D[3] * k[3] + _D[4] * k[4]
                       + _D[5] * k[5] + _D[6] * k[6])

    def __call__(self, t: float) -> np.ndarray:
        s = (t - self.t0) / self.h
        s1 = 1.0 - s
        return self.r1 + s * (self.r2 + s1 * (self.r3 + s * (self.r4 + s1 * self.r5)))


def _normalize_axis(y: np.ndarray) -> np.ndarray:
    y = y.copy()
    y[AXIS] /= np.linalg.norm(y[AXIS])
    return y


def _dopri_stages(f, y, h, k1):
    k2, _ = f(y + h * (_A2[0] * k1))
    k3, _ = f(y + h * (_A3[0] * k1 + _A3[1] * k2))
    k4, _ = f(y + h * (_A4[0] * k1 + _A4[1] * k2 + _A4[2] * k3))
    k5, _ = f(y + h * (_A5[0] * k1 + _A5[1] * k2 + _A5[2] * k3 + _A5[3] * k4))
    k6, _ = f(y + h * (_A6[0] * k1 + _A6[1] * k2 + _A6[2] * k3 + _A6[3] * k4 + _A6[4] * k5))
    y1 = y + h * (_B[0] * k1 + _B[2] * k3 + _B[3] * k4 + _B[4] * k5 + _B[5] * k6)
    k7, gn1 = f(y1)
    err = h * (_E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5 + _E[5] * k6 + _E[6] * k7)
    return y1, (k1, k2, k3, k4, k5, k6, k7), gn1, err


def integrate(initial: VectorState, params: PhysicalParams, friction: FrictionLike,
              config: IntegratorConfig = IntegratorConfig(),
              convergence: ConvergenceCriteria | None = None) -> Trajectory:
    """Integrate from ``initial`` until ``t_end``, contact loss or convergence.

    ``convergence=None`` disables the convergence stop.  A degenerate
    reaction-force denominator ends the run with that termination kind.
    """
    friction = as_friction(friction)
    eps_den = config.eps_den

    def f(y):
        return rhs(y, params, mu_at(friction, y), eps_den)

    def scalars(y):
        return monitored_scalars(y, params, mu_at(friction, y), eps_den)

    y = _normalize_axis(initial.to_array())
    k1, gn0 = f(y)
    if gn0 < 0:
        raise ValueError(f"initial reaction force is negative (g_n = {gn0:.6g})")

    ts, ys, ss = [], [], []
    window: deque = deque(maxlen=convergence.window if convergence else 1)
    termination = None

    def record(t, yv):
        sc = scalars(yv)
        ts.append(t)
        ys.append(yv)
        ss.append((sc.energy, sc.gn, sc.L3, sc.Lz, sc.LAz, sc.vA_norm, sc.Edot))
        if convergence is None:
            return None
        window.append(sample_limit(yv, sc.vA_norm, params, convergence))
        if len(window) == window.maxlen and window[0] != Limit.UNDETERMINED \
                and all(w == window[0] for w in window):
            return Termination(TerminationKind.CONVERGED, t, window[0])
        return None

    t = 0.0
    t_end = config.t_end
    dt = config.sample_dt
    next_k = 1
    termination = record(t, y)

    h = min(config.h_init, config.h_max, t_end)
    h_floor = 1e-14
    facold = 1e-4
    rejected = False
    n_accept = n_reject = 0

    while termination is None:
        if t >= t_end:
            termination = Termination(TerminationKind.TIME_END, t)
            break
        last = t + h >= t_end * (1 - 1e-15)
        if last:
            h = t_end - t
        try:
            y1, k, gn1, err_vec = _dopri_stages(f, y, h, k1)
        except DegenerateDenominator:
            h *= 0.25
            if h < h_floor * max(1.0, t):
                termination = Termination(TerminationKind.DEGENERATE_DENOMINATOR, t)
                break
            rejected = True
            continue

        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y1))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        if not math.isfinite(err):
            err = 1e10

        if err > 1.0:
            n_reject += 1
            h /= min(1.0 / _FAC_MIN, err**_EXPO / _SAFE)
            rejected = True
            if h < h_floor * max(1.0, t):
                termination = Termination(TerminationKind.DEGENERATE_DENOMINATOR, t)
            continue

        n_accept += 1
        t_new = t_end if last else t + h
        dense = _Dense(t, h, y, y1, k)

        t_event = None
        if gn1 < 0.0:
            def gn_at(tt):
                yy = _normalize_axis(dense(tt))
                return f(yy)[1]
            t_event = brentq(gn_at, t, t_new, xtol=config.event_tol, rtol=4 * np.finfo(float).eps)

        stop = t_event if t_event is not None else t_new
        while termination is None:
            ts_k = next_k * dt
            if ts_k > stop * (1 + 1e-14) or ts_k > t_end * (1 + 1e-14):
                break
            ts_k = min(ts_k, t_end)
            termination = record(ts_k, _normalize_axis(dense(ts_k)))
            next_k += 1
        if termination is not None:
            break

        if t_event is not None:
            y_ev = _normalize_axis(dense(t_event))
            if t_event > ts[-1]:
                record(t_event, y_ev)
            termination = Termination(TerminationKind.CONTACT_LOSS, t_event)
            break

        y = _normalize_axis(y1)
        t = t_new
        if t >= t_end:
            if ts[-1] < t:
                termination = record(t, y)
            if termination is None:
                termination = Termination(TerminationKind.TIME_END, t)
            break
        try:
            k1, _ = f(y)
        except DegenerateDenominator:
            termination = Termination(TerminationKind.DEGENERATE_DENOMINATOR, t)
            break

        fac11 = err**_EXPO
        fac = fac11 / facold**_BETA
        fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFE))
        h_new = h / fac
        if rejected:
            h_new = min(h_new, h)
        facold = max(err, 1e-4)
        rejected = False
        h = min(h_new, config.h_max)

    return Trajectory(
        t=np.asarray(ts),
        y=np.asarray(ys),
        scalars=np.asarray(ss),
        termination=termination,
        params=params,
        stats={"accepted": n_accept, "rejected": n_reject},
    )


def step_fixed_rk4(state: VectorState, h: float, params: PhysicalParams,
                   friction: FrictionLike) -> VectorState:
    """One classical RK4 step, no renormalisation (reference stepper)."""
    if not h > 0:
        raise ValueError("h must be positive")
    friction = as_friction(friction)
    y = state.to_array()

    def f(v):
        return rhs(v, params, mu_at(friction, v))[0]

    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return VectorState.from_array(y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def integrate_fixed_rk4(state: VectorState, h: float, n_steps: int,
                        params: PhysicalParams, friction: FrictionLike) -> VectorState:
    for _ in range(n_steps):
        state = step_fixed_rk4(state, h, params, friction)
    return state
