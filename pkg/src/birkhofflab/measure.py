"""Ball measures, radius schedules, expected hit counts, and exponent predictions.

Closed forms are used where the invariant measure has one (Lebesgue for
the dyadic and toral maps, the arcsine law for the logistic map).  The
LSV map gets a power-law model ``mu[0,x] ~ c x^(1-alpha)`` at the origin
with an empirically calibrated coefficient, and a piecewise-linear
empirical CDF away from it; both are built once per alpha from a long
orbit (1e7 samples, 1e4 burn-in) with a fixed documented seed, so expected
counts are reproducible across runs and worker counts.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, _rng
from ._kernels import (
    MM_ARCSINE,
    MM_EMPIRICAL,
    MM_LEBESGUE_1D,
    MM_LEBESGUE_TORUS,
    MM_ORIGIN_POWER,
    ROOT_HALF,
    SCHED_MEASURE_HARMONIC,
    SCHED_ORIGIN_KIM,
    SCHED_RADIUS_POWER,
)
from .dynamics import SystemDescriptor, SystemId

#: seed of the single-threaded calibration/CDF-building orbit (constant by
#: design: expected counts stay comparable across experiment seeds)
CALIBRATION_SEED = 0x5EED_CA11_B0A7_ED01
CALIBRATION_SAMPLES = 10_000_000
CALIBRATION_BURN_IN = 10_000
EMPIRICAL_GRID_SIZE = 4096

_DUMMY_GRID = np.zeros(2)


class IntegrableObservableWarning(UserWarning):
    """k is below the non-integrable threshold; ergodic theorem applies."""


class MeasureRegime(enum.Enum):
    LEBESGUE_1D = "lebesgue_1d"
    LEBESGUE_TORUS = "lebesgue_torus"
    ARCSINE = "arcsine"
    ORIGIN_POWER = "origin_power"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class BallMeasureModel:
    """mu(B(p, r)) for one system; immutable after construction."""

    regime: MeasureRegime
    alpha: float = 0.0
    origin_coeff: Optional[float] = None
    cdf_grid: Optional[np.ndarray] = None

    @property
    def kernel_id(self) -> int:
        return {
            MeasureRegime.LEBESGUE_1D: MM_LEBESGUE_1D,
            MeasureRegime.LEBESGUE_TORUS: MM_LEBESGUE_TORUS,
            MeasureRegime.ARCSINE: MM_ARCSINE,
            MeasureRegime.ORIGIN_POWER: MM_ORIGIN_POWER,
            MeasureRegime.EMPIRICAL: MM_EMPIRICAL,
        }[self.regime]

    @property
    def kernel_params(self):
        """(mm_id, mm_c, mm_e, grid) as consumed by the streaming kernels."""
        if self.regime is MeasureRegime.ORIGIN_POWER:
            if self.origin_coeff is None:
                raise ValueError("origin-power model lacks its calibrated coefficient")
            return self.kernel_id, self.origin_coeff, 1.0 - self.alpha, _DUMMY_GRID
        if self.regime is MeasureRegime.EMPIRICAL:
            if self.cdf_grid is None:
                raise ValueError("empirical model lacks its CDF grid")
            return self.kernel_id, 0.0, 0.0, self.cdf_grid
        return self.kernel_id, 0.0, 0.0, _DUMMY_GRID


# ---------------------------------------------------------------------------
# LSV calibration (single-threaded build step, cached per alpha)
# ---------------------------------------------------------------------------

_lsv_cache: dict = {}


def _calibration_start(alpha: float) -> float:
    state = _rng.xoshiro_state(CALIBRATION_SEED)
    u, _ = _rng.next_double(state)
    return u


def lsv_empirical_cdf(alpha: float, n_samples: int = CALIBRATION_SAMPLES,
                      burn_in: int = CALIBRATION_BURN_IN,
                      grid_size: int = EMPIRICAL_GRID_SIZE) -> np.ndarray:
    """Piecewise-linear CDF estimate of the LSV invariant measure.

    Returned as grid values F(i/G), i = 0..G, with F(0) = 0 and F(1) = 1;
    nondecreasing by construction.
    """
    key = ("cdf", alpha, n_samples, burn_in, grid_size)
    if key not in _lsv_cache:
        counts = np.zeros(grid_size, dtype=np.int64)
        _kernels.interval_histogram(
            _kernels.MAP_LSV, alpha, _calibration_start(alpha), burn_in,
            n_samples, counts,
        )
        grid = np.empty(grid_size + 1)
        grid[0] = 0.0
        np.cumsum(counts / n_samples, out=grid[1:])
        grid[grid_size] = 1.0
        _lsv_cache[key] = grid
    return _lsv_cache[key]


def lsv_origin_coefficient(alpha: float, n_samples: int = CALIBRATION_SAMPLES,
                           burn_in: int = CALIBRATION_BURN_IN) -> float:
    """Coefficient c in mu[0, x] ~ c x^(1-alpha), fit over x in [1e-4, 1e-2].

    Least squares through the origin of the empirical measure of [0, x]
    against x^(1-alpha) on a log-spaced grid.
    """
    key = ("coeff", alpha, n_samples, burn_in)
    if key not in _lsv_cache:
        thresholds = np.logspace(-4.0, -2.0, 25)
        counts = np.zeros(thresholds.size, dtype=np.int64)
        _kernels.lsv_tail_counts(
            alpha, _calibration_start(alpha), burn_in, n_samples,
            thresholds, counts,
        )
        emp = counts / n_samples
        basis = thresholds ** (1.0 - alpha)
        _lsv_cache[key] = float(np.dot(emp, basis) / np.dot(basis, basis))
    return _lsv_cache[key]


def build_measure_model(system: SystemDescriptor, p) -> BallMeasureModel:
    """Ball-measure model for nested balls about p under this system."""
    pt = system.validate_point(p)
    sid = system.id
    if sid in (SystemId.DOUBLING, SystemId.TENT):
        return BallMeasureModel(MeasureRegime.LEBESGUE_1D)
    if sid is SystemId.CATMAP:
        return BallMeasureModel(MeasureRegime.LEBESGUE_TORUS)
    if sid is SystemId.LOGISTIC:
        return BallMeasureModel(MeasureRegime.ARCSINE)
    if pt[0] == 0.0:
        return BallMeasureModel(
            MeasureRegime.ORIGIN_POWER,
            alpha=system.alpha,
            origin_coeff=lsv_origin_coefficient(system.alpha),
        )
    return BallMeasureModel(
        MeasureRegime.EMPIRICAL,
        alpha=system.alpha,
        cdf_grid=lsv_empirical_cdf(system.alpha),
    )


# ---------------------------------------------------------------------------
# ball measures and their inversion
# ---------------------------------------------------------------------------

def mu_ball(model: BallMeasureModel, p, r: float) -> float:
    """Measure of the ball B(p, r); monotone and in [0, 1]."""
    if r <= 0.0:
        return 0.0
    if model.regime is MeasureRegime.LEBESGUE_TORUS:
        return float(_kernels.mu_torus_ball(r))
    if isinstance(p, tuple):
        (p,) = p
    p = float(p)
    if model.regime is MeasureRegime.ORIGIN_POWER and p != 0.0:
        raise ValueError("origin-power model is only valid for balls about p=0")
    mm_id, mm_c, mm_e, grid = model.kernel_params
    return float(_kernels.mu_interval_ball(mm_id, p, r, mm_c, mm_e, grid))


def max_radius(model: BallMeasureModel, p) -> float:
    if model.regime is MeasureRegime.LEBESGUE_TORUS:
        return ROOT_HALF
    if isinstance(p, tuple):
        (p,) = p
    return max(float(p), 1.0 - float(p))


def radius_for_measure(model: BallMeasureModel, p, target_mu: float,
                       rel_tol: float = 1e-12) -> float:
    """Invert mu_ball by bisection: |mu_ball(r) - target| <= rel_tol*target."""
    if not 0.0 < target_mu <= 1.0:
        raise ValueError("target measure must lie in (0, 1]")
    hi = max_radius(model, p)
    if mu_ball(model, p, hi) < target_mu * (1.0 - rel_tol):
        raise ValueError(
            "target measure %g exceeds the ball measure at maximal radius" % target_mu
        )
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = mu_ball(model, p, mid)
        if abs(v - target_mu) <= rel_tol * target_mu:
            return mid
        if v < target_mu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# exponent predictions
# ---------------------------------------------------------------------------

class GrowthRegime(enum.Enum):
    GENERIC_BOUNDED_DENSITY = "GenericBoundedDensity"
    INDIFFERENT_FIXED_POINT = "IndifferentFixedPoint"
    SINGULAR_DENSITY = "SingularDensity"


@dataclass(frozen=True)
class Prediction:
    """Predicted limit of log S_n / log n for a (system, p, k) triple."""

    exponent: float
    regime_label: GrowthRegime
    k: float
    D: int
    alpha: float
    integrable: bool = False


def density_singularity_exponent(system: SystemDescriptor, p) -> float:
    """Blow-up exponent a of the invariant density h(x) ~ d(x,p)^-a at p."""
    pt = system.validate_point(p)
    if system.id is SystemId.LSV and pt[0] == 0.0:
        return system.alpha
    if system.id is SystemId.LOGISTIC and pt[0] in (0.0, 1.0):
        return 0.5
    return 0.0


def effective_dimension(system: SystemDescriptor, p) -> float:
    """D - alpha_density: the local scaling exponent of ball measures at p."""
    return system.dimension - density_singularity_exponent(system, p)


def predicted_exponent(system: SystemDescriptor, p, k: float) -> Prediction:
    """Classify the growth regime and predict lim log S_n / log n.

    Bounded positive density gives k/D; the LSV indifferent fixed point
    gives k+alpha; a density singularity h ~ d^-alpha gives k/(D-alpha).
    Integrable k (below the local threshold) warns and falls back to the
    ergodic theorem's exponent 1.
    """
    pt = system.validate_point(p)
    k = float(k)
    if k <= 0:
        raise ValueError("predictions need k > 0")
    D = system.dimension
    sing = density_singularity_exponent(system, pt)
    d_eff = D - sing
    if system.id is SystemId.LSV and pt[0] == 0.0:
        label = GrowthRegime.INDIFFERENT_FIXED_POINT
        exponent = k + system.alpha
        alpha = system.alpha
    elif sing > 0.0:
        label = GrowthRegime.SINGULAR_DENSITY
        exponent = k / d_eff
        alpha = sing
    else:
        label = GrowthRegime.GENERIC_BOUNDED_DENSITY
        exponent = k / D
        alpha = 0.0
    if k < d_eff:
        warnings.warn(
            "k=%g is integrable at this point (threshold %g); the ergodic "
            "theorem applies and S_n grows linearly" % (k, d_eff),
            IntegrableObservableWarning,
            stacklevel=2,
        )
        return Prediction(1.0, label, k, D, alpha, integrable=True)
    return Prediction(exponent, label, k, D, alpha)


# ---------------------------------------------------------------------------
# target schedules
# ---------------------------------------------------------------------------

class ScheduleKind(enum.Enum):
    RADIUS_POWER = "radius_power"
    MEASURE_HARMONIC = "measure_harmonic"
    KIM_NON_BC = "kim"


@dataclass(frozen=True)
class TargetSchedule:
    """A nested-ball sequence B_j, formula-backed (O(1) memory).

    radius_power: r_j = c j^(-1/D).  measure_harmonic: mu_j =
    min(1, c log^beta(j)/j), monotonized from the right over the finite
    rising prefix (j < j*) so the balls are genuinely nested.  kim:
    one-sided targets [0, j^-gamma) about the LSV origin.
    """

    kind: ScheduleKind
    system: SystemDescriptor
    p: tuple
    n_max: int
    model: BallMeasureModel
    c: float = 0.25
    beta: float = 0.0
    gamma: float = 2.0
    jstar: int = 1
    mu_star: float = 0.0

    @property
    def kernel_params(self):
        """(sched_kind, c, beta, gamma, jstar, mu_star, inv_d) in kernel order."""
        kind = {
            ScheduleKind.RADIUS_POWER: SCHED_RADIUS_POWER,
            ScheduleKind.MEASURE_HARMONIC: SCHED_MEASURE_HARMONIC,
            ScheduleKind.KIM_NON_BC: SCHED_ORIGIN_KIM,
        }[self.kind]
        return (
            kind,
            self.c,
            self.beta,
            self.gamma,
            self.jstar,
            self.mu_star,
            1.0 / self.system.dimension,
        )

    def radius_at(self, j: int) -> float:
        """Radius r_j of ball B_j (bisection-inverted for measure_harmonic)."""
        if j < 1:
            raise ValueError("schedules are 1-indexed")
        if self.kind is ScheduleKind.RADIUS_POWER:
            return self.c * float(j) ** (-1.0 / self.system.dimension)
        if self.kind is ScheduleKind.KIM_NON_BC:
            return float(j) ** (-self.gamma)
        mu = self.mu_at(j)
        if mu <= 0.0:
            return 0.0
        return radius_for_measure(self.model, self.p[0] if len(self.p) == 1 else self.p, mu)

    def mu_at(self, j: int) -> float:
        """Measure mu(B_j), exactly as accumulated into E_n by the kernels."""
        if j < 1:
            raise ValueError("schedules are 1-indexed")
        fj = float(j)
        if self.kind is ScheduleKind.RADIUS_POWER:
            p = self.p if len(self.p) > 1 else self.p[0]
            return mu_ball(self.model, p, self.radius_at(j))
        if self.kind is ScheduleKind.KIM_NON_BC:
            return mu_ball(self.model, 0.0, fj ** (-self.gamma))
        if j <= self.jstar:
            return self.mu_star
        lg = 1.0 if self.beta == 0.0 else math.log(fj) ** self.beta
        return min(1.0, self.c * lg / fj)

    def expected_count(self, n: int) -> float:
        """E_n = sum_{j<=n} mu(B_j) by direct summation (test-scale only)."""
        return float(math.fsum(self.mu_at(j) for j in range(1, n + 1)))


def _harmonic_peak(c: float, beta: float):
    """Integer argmax of min(1, c log^beta(j)/j) and its value."""
    if beta == 0.0:
        return 1, min(1.0, c)
    best_j, best_v = 1, 0.0
    for j in {1, 2, max(1, math.floor(math.exp(beta))), math.ceil(math.exp(beta))}:
        v = min(1.0, c * math.log(j) ** beta / j)
        if v > best_v:
            best_j, best_v = j, v
    return best_j, best_v


def build_schedule(kind, system: SystemDescriptor, p, n_max: int,
                   c: float = 0.25, beta: float = 0.0, gamma: float = 2.0,
                   model: Optional[BallMeasureModel] = None) -> TargetSchedule:
    """Materialize a lazily-evaluated schedule; validates parameter ranges."""
    if isinstance(kind, str):
        kind = ScheduleKind(kind)
    pt = system.validate_point(p)
    if model is None:
        model = build_measure_model(system, pt)
    jstar, mu_star = 1, 0.0
    if kind is ScheduleKind.RADIUS_POWER:
        if not c > 0:
            raise ValueError("radius_power schedules need c > 0")
    elif kind is ScheduleKind.MEASURE_HARMONIC:
        if not c > 0:
            raise ValueError("measure_harmonic schedules need c > 0")
        if beta < 0:
            raise ValueError("measure_harmonic schedules need beta >= 0")
        jstar, mu_star = _harmonic_peak(c, beta)
    elif kind is ScheduleKind.KIM_NON_BC:
        if system.id is not SystemId.LSV or pt[0] != 0.0:
            raise ValueError("the kim schedule targets the LSV origin (p=0)")
        alpha = system.alpha
        if alpha >= 1.0 or not 1.0 < gamma <= 1.0 / (1.0 - alpha):
            raise ValueError(
                "kim schedules need 1 < gamma <= 1/(1-alpha) = %g" % (1.0 / (1.0 - alpha),)
            )
    sched = TargetSchedule(
        kind=kind, system=system, p=pt, n_max=int(n_max), model=model,
        c=float(c), beta=float(beta), gamma=float(gamma),
        jstar=int(jstar), mu_star=float(mu_star),
    )
    # nestedness spot check: radii must not increase
    r1, r2, r3 = (sched.radius_at(j) for j in (1, 2, 3))
    assert r1 >= r2 >= r3, "schedule radii are not nonincreasing"
    return sched
