"""Observables whose Birkhoff sums are accumulated along orbits."""

import enum
from dataclasses import dataclass

from . import _kernels
from .dynamics import OrbitState, SystemDescriptor, distance


class ObservableKind(enum.Enum):
    POWER_DISTANCE = "power"
    LOG_DISTANCE = "log"


@dataclass(frozen=True)
class ObservableSpec:
    """phi(x) = d(x,p)^-k (power) or -log d(x,p) (log).

    The log kind is the integrable contrast case: it carries no growth
    exponent prediction and feeds only the running-maximum diagnostics.
    """

    kind: ObservableKind
    p: tuple
    k: float = 1.0

    def __post_init__(self):
        if self.kind is ObservableKind.POWER_DISTANCE and not self.k > 0:
            raise ValueError("power-distance observables need k > 0")

    @staticmethod
    def power(p, k, system: SystemDescriptor) -> "ObservableSpec":
        return ObservableSpec(ObservableKind.POWER_DISTANCE, system.validate_point(p), float(k))

    @staticmethod
    def log(p, system: SystemDescriptor) -> "ObservableSpec":
        return ObservableSpec(ObservableKind.LOG_DISTANCE, system.validate_point(p))

    @property
    def kernel_kind(self) -> int:
        return (
            _kernels.OBS_POWER
            if self.kind is ObservableKind.POWER_DISTANCE
            else _kernels.OBS_LOG
        )


def evaluate(spec: ObservableSpec, state: OrbitState, system: SystemDescriptor) -> float:
    """Observable value at the current orbit point (finite by the distance clamp)."""
    d = distance(state, spec.p, system)
    return float(_kernels.observable_value(spec.kernel_kind, d, spec.k))
