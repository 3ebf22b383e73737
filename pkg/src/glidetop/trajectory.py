"""Trajectory container and termination records."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .dynamics import MonitoredScalars
from .params import PhysicalParams
from .state import VectorState

SCALAR_FIELDS = ("energy", "gn", "L3", "Lz", "LAz", "vA_norm", "Edot")


class Limit(str, enum.Enum):
    UPRIGHT = "upright"
    INVERTED = "inverted"
    UNDETERMINED = "undetermined"


class TerminationKind(str, enum.Enum):
    TIME_END = "time_end"
    CONTACT_LOSS = "contact_loss"
    CONVERGED = "converged"
    DEGENERATE_DENOMINATOR = "degenerate_denominator"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    t: float
    limit: Limit | None = None

    def as_dict(self) -> dict:
        out = {"kind": self.kind.value, "t": self.t}
        if self.limit is not None:
            out["limit"] = self.limit.value
        return out


class Sample(NamedTuple):
    t: float
    state: VectorState
    scalars: MonitoredScalars


@dataclass
class Trajectory:
    """Samples on the output grid; arrays are row-aligned.

    ``y`` holds packed vector states, ``scalars`` the monitored quantities in
    ``SCALAR_FIELDS`` column order.
    """

    t: np.ndarray
    y: np.ndarray
    scalars: np.ndarray
    termination: Termination
    params: PhysicalParams
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i) -> Sample:
        return Sample(float(self.t[i]), VectorState.from_array(self.y[i]),
                      MonitoredScalars(*(float(v) for v in self.scalars[i])))

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    def column(self, name: str) -> np.ndarray:
        return self.scalars[:, SCALAR_FIELDS.index(name)]

    @property
    def energy(self) -> np.ndarray:
        return self.column("energy")

    @property
    def gn(self) -> np.ndarray:
        return self.column("gn")

    @property
    def axis(self) -> np.ndarray:
        return self.y[:, 5:8]

    @property
    def L(self) -> np.ndarray:
        return self.y[:, 2:5]
