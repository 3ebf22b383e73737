"""Physical parameters and numerical guards."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# Reaction-force denominator guard, relative to I1**2.
EPS_DEN = 1e-12
# |sin(theta)| below which the Euler chart is declared singular.
EPS_SING = 1e-8


@dataclass(frozen=True)
class PhysicalParams:
    """Axisymmetric top with its tip on a horizontal plane (SI units).

    ``I1star`` is the transverse inertia about the tip, ``I1 + m*l**2``.
    ``I1star_override`` exists only for negative-control diagnostics
    (``glidetop check``); leave it ``None`` for physics.
    """

    m: float
    g: float
    l: float
    I1: float
    I3: float
    I1star_override: float | None = None
    I1star: float = field(init=False)

    def __post_init__(self):
        for name in ("m", "g", "l", "I1", "I3"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.I3 > 2.0 * self.I1:
            raise ValueError(
                f"I3={self.I3} exceeds 2*I1={2 * self.I1}: not a physical rigid body"
            )
        star = self.I1 + self.m * self.l**2
        if self.I1star_override is not None:
            star = float(self.I1star_override)
        object.__setattr__(self, "I1star", star)

    @property
    def mgl(self) -> float:
        return self.m * self.g * self.l

    @property
    def upright_threshold(self) -> float:
        """Critical axial angular momentum 2*sqrt(m*g*l*I1star)."""
        return 2.0 * math.sqrt(self.mgl * self.I1star)

    def as_dict(self) -> dict:
        out = {"m": self.m, "g": self.g, "l": self.l, "I1": self.I1, "I3": self.I3,
               "I1star": self.I1star}
        if self.I1star_override is not None:
            out["I1star_override"] = self.I1star_override
        return out
