"""birkhofflab: growth of Birkhoff sums of singular observables and
shrinking-target hit statistics on chaotic interval and torus maps."""

from ._jit import JIT_ENABLED
from .accumulate import (
    CheckpointRecord,
    InsufficientDataError,
    RunResult,
    checkpoint_times,
    escape_time,
    estimate_exponent,
    mn_fluctuation,
    pointwise_exponent,
    run_orbit,
    trimmed_sum,
)
from .dynamics import (
    DensityRegime,
    OrbitState,
    Representation,
    SystemDescriptor,
    SystemId,
    catmap_inverse,
    catmap_step,
    catmap_system,
    distance,
    doubling_step,
    doubling_system,
    lsv_step,
    lsv_system,
    logistic_step,
    logistic_system,
    tent_step,
    tent_system,
)
from .measure import (
    BallMeasureModel,
    GrowthRegime,
    IntegrableObservableWarning,
    MeasureRegime,
    Prediction,
    ScheduleKind,
    TargetSchedule,
    build_measure_model,
    build_schedule,
    mu_ball,
    predicted_exponent,
    radius_for_measure,
)
from .observables import ObservableKind, ObservableSpec, evaluate

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED",
    "CheckpointRecord",
    "InsufficientDataError",
    "RunResult",
    "checkpoint_times",
    "escape_time",
    "estimate_exponent",
    "mn_fluctuation",
    "pointwise_exponent",
    "run_orbit",
    "trimmed_sum",
    "DensityRegime",
    "OrbitState",
    "Representation",
    "SystemDescriptor",
    "SystemId",
    "catmap_inverse",
    "catmap_step",
    "catmap_system",
    "distance",
    "doubling_step",
    "doubling_system",
    "lsv_step",
    "lsv_system",
    "logistic_step",
    "logistic_system",
    "tent_step",
    "tent_system",
    "BallMeasureModel",
    "GrowthRegime",
    "IntegrableObservableWarning",
    "MeasureRegime",
    "Prediction",
    "ScheduleKind",
    "TargetSchedule",
    "build_measure_model",
    "build_schedule",
    "mu_ball",
    "predicted_exponent",
    "radius_for_measure",
    "ObservableKind",
    "ObservableSpec",
    "evaluate",
]
