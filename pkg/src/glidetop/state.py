"""State containers for the two coordinate charts.

The vector chart packs ``(rdot[2], L[3], axis[3])`` into one length-8 array
for the integrator; all components are inertial-frame.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STATE_SIZE = 8
RDOT = slice(0, 2)
MOMENTUM = slice(2, 5)
AXIS = slice(5, 8)


@dataclass(frozen=True)
class VectorState:
    rdot: np.ndarray
    L: np.ndarray
    axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rdot", np.asarray(self.rdot, dtype=float).reshape(2))
        object.__setattr__(self, "L", np.asarray(self.L, dtype=float).reshape(3))
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float).reshape(3))

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.rdot, self.L, self.axis])

    @classmethod
    def from_array(cls, y) -> "VectorState":
        y = np.asarray(y, dtype=float)
        return cls(y[RDOT].copy(), y[MOMENTUM].copy(), y[AXIS].copy())

    def normalized(self) -> "VectorState":
        return VectorState(self.rdot, self.L, self.axis / np.linalg.norm(self.axis))

    @classmethod
    def upright(cls, L3: float) -> "VectorState":
        """Vertical spin with the axis along +z."""
        return cls(np.zeros(2), [0.0, 0.0, L3], [0.0, 0.0, 1.0])

    @classmethod
    def inverted(cls, L3: float) -> "VectorState":
        """Vertical spin with the axis along -z; ``L3`` is still L·axis."""
        return cls(np.zeros(2), [0.0, 0.0, -L3], [0.0, 0.0, -1.0])


@dataclass(frozen=True)
class EulerState:
    """Euler-chart state.

    ``nux``/``nuy`` are tip-velocity components along the horizontal frame
    that precesses with the axis (x along the horizontal projection of the
    axis, y perpendicular to it).
    """

    theta: float
    thetadot: float
    phidot: float
    omega3: float
    nux: float
    nuy: float

    def to_array(self) -> np.ndarray:
        return np.array([self.theta, self.thetadot, self.phidot, self.omega3, self.nux, self.nuy])

    @classmethod
    def from_array(cls, a) -> "EulerState":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class EulerRate:
    """Time derivative of an :class:`EulerState` (plus the azimuth rate)."""

    thetadot: float
    thetaddot: float
    phiddot: float
    omega3dot: float
    nuxdot: float
    nuydot: float

    def to_array(self) -> np.ndarray:
        return np.array([self.thetadot, self.thetaddot, self.phiddot, self.omega3dot,
                         self.nuxdot, self.nuydot])
