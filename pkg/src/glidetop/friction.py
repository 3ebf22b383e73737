"""Friction-coefficient models.

A friction model maps a state to a nonnegative scalar coefficient.  It must
not depend on the reaction force, which is solved for with the coefficient
already known.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union


class FrictionModel:
    """Base class: subclasses implement ``__call__(state) -> mu``.

    ``constant`` is set when the coefficient is state independent, letting the
    integrator skip per-evaluation calls.
    """

    constant: float | None = None

    def __call__(self, state) -> float:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantFriction(FrictionModel):
    mu: float

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"friction coefficient must be >= 0, got {self.mu!r}")

    @property
    def constant(self) -> float:  # type: ignore[override]
        return self.mu

    def __call__(self, state) -> float:
        return self.mu


@dataclass(frozen=True)
class CallableFriction(FrictionModel):
    """Wraps ``fn(state) -> mu``; negative values are rejected at evaluation."""

    fn: Callable[[object], float]

    def __call__(self, state) -> float:
        mu = float(self.fn(state))
        if not mu >= 0:
            raise ValueError(f"friction model returned {mu!r} < 0")
        return mu


FrictionLike = Union[FrictionModel, Callable[[object], float], float, int]


def as_friction(friction: FrictionLike) -> FrictionModel:
    if isinstance(friction, FrictionModel):
        return friction
    if callable(friction):
        return CallableFriction(friction)
    return ConstantFriction(float(friction))
