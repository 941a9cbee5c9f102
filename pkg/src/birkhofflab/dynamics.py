"""Maps, orbit state representations, and the phase-space metric.

Each map carries a numeric representation chosen so that long orbits stay
statistically faithful:

* doubling and tent act exactly on a bit reservoir (the binary expansion
  of a Lebesgue-random point, replenished lazily from a PRNG) -- naive
  float iteration of these maps collapses to 0 within ~53 steps;
* the toral automorphism acts exactly on 64-bit fixed-point pairs
  (integer matrix action mod 2**64, exactly invertible);
* LSV and logistic use float64 pseudo-orbits, which is adequate because
  both admit absolutely continuous invariant measures and only statistical
  laws are measured.
"""

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from . import _kernels, _rng
from ._kernels import DIST_CLAMP


class SystemId(enum.Enum):
    LSV = "lsv"
    DOUBLING = "doubling"
    TENT = "tent"
    LOGISTIC = "logistic"
    CATMAP = "catmap"


class Representation(enum.Enum):
    FLOAT64 = "float64"
    BIT_RESERVOIR = "bit_reservoir"
    FIXED_POINT64 = "fixed_point64"


class DensityRegime(enum.Enum):
    LEBESGUE_LIKE = "lebesgue_like"
    ARCSINE_BOUNDARY = "arcsine_boundary"
    INTERMITTENT_ORIGIN = "intermittent_origin"


_REPRESENTATION = {
    SystemId.LSV: Representation.FLOAT64,
    SystemId.DOUBLING: Representation.BIT_RESERVOIR,
    SystemId.TENT: Representation.BIT_RESERVOIR,
    SystemId.LOGISTIC: Representation.FLOAT64,
    SystemId.CATMAP: Representation.FIXED_POINT64,
}

_DENSITY = {
    SystemId.LSV: DensityRegime.INTERMITTENT_ORIGIN,
    SystemId.DOUBLING: DensityRegime.LEBESGUE_LIKE,
    SystemId.TENT: DensityRegime.LEBESGUE_LIKE,
    SystemId.LOGISTIC: DensityRegime.ARCSINE_BOUNDARY,
    SystemId.CATMAP: DensityRegime.LEBESGUE_LIKE,
}


@dataclass(frozen=True)
class SystemDescriptor:
    """Identity and numeric strategy of one map; immutable and shareable."""

    id: SystemId
    alpha: float = 0.0

    def __post_init__(self):
        if self.id is SystemId.LSV:
            if not 0.0 <= self.alpha < 1.0:
                raise ValueError(
                    "LSV requires 0 <= alpha < 1 (got alpha=%r)" % (self.alpha,)
                )
        elif self.alpha != 0.0:
            raise ValueError("alpha is only meaningful for the LSV map")

    @property
    def dimension(self) -> int:
        return 2 if self.id is SystemId.CATMAP else 1

    @property
    def representation(self) -> Representation:
        return _REPRESENTATION[self.id]

    @property
    def density_regime(self) -> DensityRegime:
        return _DENSITY[self.id]

    def validate_point(self, p) -> Tuple[float, ...]:
        """Normalize a target point to a tuple and check it lies in phase space."""
        if self.dimension == 2:
            try:
                px, py = p
            except TypeError:
                raise ValueError("catmap targets need two coordinates") from None
            if not (0.0 <= px <= 1.0 and 0.0 <= py <= 1.0):
                raise ValueError("target point outside the unit torus")
            return (float(px), float(py))
        if isinstance(p, tuple):
            if len(p) != 1:
                raise ValueError("1-D systems take a scalar target point")
            p = p[0]
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError("target point outside [0, 1]")
        return (p,)

    def point_warnings(self, p) -> list:
        """Metadata warnings for theoretically awkward target points."""
        notes = []
        pt = self.validate_point(p)
        if self.id in (SystemId.LSV, SystemId.DOUBLING, SystemId.TENT):
            if pt[0] == 0.5:
                notes.append(
                    "target point sits at the branch discontinuity x=1/2"
                )
        return notes


def lsv_system(alpha: float) -> SystemDescriptor:
    return SystemDescriptor(SystemId.LSV, alpha)


def doubling_system() -> SystemDescriptor:
    return SystemDescriptor(SystemId.DOUBLING)


def tent_system() -> SystemDescriptor:
    return SystemDescriptor(SystemId.TENT)


def logistic_system() -> SystemDescriptor:
    return SystemDescriptor(SystemId.LOGISTIC)


def catmap_system() -> SystemDescriptor:
    return SystemDescriptor(SystemId.CATMAP)


def system_from_name(name: str, alpha: float = 0.0) -> SystemDescriptor:
    return SystemDescriptor(SystemId(name), alpha if name == "lsv" else 0.0)


# ---------------------------------------------------------------------------
# orbit state
# ---------------------------------------------------------------------------

@dataclass
class OrbitState:
    """The evolving point, in one of three representations.

    Float systems populate ``float_value``.  Bit-reservoir systems hold the
    leading 64 effective digits in ``window`` (MSB first), a pending
    complement flag for incoming raw bits in ``flip``, at least 128 raw
    digits ahead of the read position in ``pend0``/``pend1`` (``cnt0`` bits
    left in pend0, pend1 full), and the PRNG state that replenishes the
    tail in ``rng``.  The fixed-point torus stores ``pair`` = (x, y) as
    fractions over 2**64.
    """

    float_value: Optional[float] = None
    window: Optional[np.uint64] = None
    flip: Optional[np.uint64] = None
    pend0: Optional[np.uint64] = None
    cnt0: int = 0
    pend1: Optional[np.uint64] = None
    rng: Optional[tuple] = None
    pair: Optional[Tuple[np.uint64, np.uint64]] = None

    def bits_ahead(self) -> int:
        """Digits available from the read position (window start) onward."""
        if self.window is None:
            raise ValueError("not a bit-reservoir state")
        return 64 + self.cnt0 + 64

    def represented_value(self):
        """Phase-space coordinates as float(s)."""
        if self.float_value is not None:
            return self.float_value
        if self.window is not None:
            return float(self.window) * _kernels.TWO_NEG64
        ux, uy = self.pair
        return (float(ux) * _kernels.TWO_NEG64, float(uy) * _kernels.TWO_NEG64)


def float_state(x: float) -> OrbitState:
    if not 0.0 <= x <= 1.0:
        raise ValueError("float state outside [0, 1]")
    return OrbitState(float_value=float(x))


def bit_state_from_rng(rng_state) -> OrbitState:
    """Lebesgue-random bit reservoir: digits drawn straight from the PRNG."""
    window, rng_state = _rng.next_word(rng_state)
    pend0, rng_state = _rng.next_word(rng_state)
    pend1, rng_state = _rng.next_word(rng_state)
    return OrbitState(
        window=window,
        flip=np.uint64(0),
        pend0=pend0,
        cnt0=64,
        pend1=pend1,
        rng=rng_state,
    )


def bit_state_from_fraction(value: Fraction) -> OrbitState:
    """Bit reservoir for a dyadic rational with at most a 64-bit expansion.

    The tail beyond the expansion is all zeros, realized by the all-zero
    PRNG state (xoshiro's fixed point emits zero words forever).  Intended
    for exactness tests against rational arithmetic.
    """
    if not 0 <= value < 1:
        raise ValueError("value must lie in [0, 1)")
    scaled = value * (1 << 64)
    if scaled.denominator != 1:
        raise ValueError("value must be dyadic with at most 64 bits")
    zero = np.uint64(0)
    return OrbitState(
        window=np.uint64(int(scaled)),
        flip=zero,
        pend0=zero,
        cnt0=64,
        pend1=zero,
        rng=(zero, zero, zero, zero),
    )


def fixed_state(ux: int, uy: int) -> OrbitState:
    mask = _rng.U64_MASK
    return OrbitState(pair=(np.uint64(ux & mask), np.uint64(uy & mask)))


# ---------------------------------------------------------------------------
# step operations
# ---------------------------------------------------------------------------

def _check_unit_interval(x, what):
    # one unit of rounding past the interval is a domain error by contract
    if x < -2.0 ** -52 or x > 1.0 + 2.0 ** -52:
        raise ValueError("%s outside [0, 1]: %r" % (what, x))


def lsv_step(x: float, alpha: float) -> float:
    """T_alpha(x); left branch for x <= 1/2, right branch otherwise.

    The bare formula tolerates alpha = 1; the probability-measure regime
    (alpha < 1) is enforced where systems are constructed.
    """
    _check_unit_interval(x, "lsv_step input")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("lsv_step needs 0 <= alpha <= 1")
    return float(_kernels.step_lsv(float(x), float(alpha)))


def logistic_step(x: float) -> float:
    """4x(1-x) with a single rounding per multiply."""
    _check_unit_interval(x, "logistic_step input")
    return float(_kernels.step_logistic(float(x)))


def _dyadic_step(state: OrbitState, tent: int) -> OrbitState:
    if state.window is None:
        raise ValueError("doubling/tent steps need a bit-reservoir state")
    res = _kernels.step_dyadic(
        state.window,
        state.flip,
        state.pend0,
        state.cnt0,
        state.pend1,
        state.rng[0],
        state.rng[1],
        state.rng[2],
        state.rng[3],
        tent,
    )
    u = np.uint64
    return replace(
        state,
        window=u(res[0]),
        flip=u(res[1]),
        pend0=u(res[2]),
        cnt0=int(res[3]),
        pend1=u(res[4]),
        rng=(u(res[5]), u(res[6]), u(res[7]), u(res[8])),
    )


def doubling_step(state: OrbitState) -> OrbitState:
    """Advance one binary digit: exactly 2x mod 1 on the represented point."""
    return _dyadic_step(state, 0)


def tent_step(state: OrbitState) -> OrbitState:
    """Binary shift, complementing the remaining digits when the leading
    digit was 1: the exact tent-map action on binary expansions."""
    return _dyadic_step(state, 1)


def catmap_step(state: OrbitState) -> OrbitState:
    if state.pair is None:
        raise ValueError("catmap steps need a fixed-point state")
    nx, ny = _kernels.step_torus(state.pair[0], state.pair[1])
    return OrbitState(pair=(np.uint64(nx), np.uint64(ny)))


def catmap_inverse(state: OrbitState) -> OrbitState:
    if state.pair is None:
        raise ValueError("catmap steps need a fixed-point state")
    nx, ny = _kernels.step_torus_inverse(state.pair[0], state.pair[1])
    return OrbitState(pair=(np.uint64(nx), np.uint64(ny)))


def distance(state: OrbitState, p, system: SystemDescriptor) -> float:
    """Metric distance from the orbit point to p, clamped below at 2**-63.

    1-D systems use the plain interval metric |x - p|; the torus uses the
    Euclidean metric with per-coordinate wrap-around.
    """
    pt = system.validate_point(p)
    if system.dimension == 2:
        x, y = state.represented_value()
        return float(_kernels.dist_torus(x, y, pt[0], pt[1]))
    x = state.represented_value()
    return float(_kernels.dist_interval(x, pt[0]))


# ---------------------------------------------------------------------------
# invariant-measure initial states
# ---------------------------------------------------------------------------

#: discarded steps before sampling starts for maps without an exact draw
DEFAULT_BURN_IN = 10_000


def initial_state(system: SystemDescriptor, rng_state):
    """Draw the orbit start from the invariant measure where exact.

    Returns (state, burn_in, rng_state): Lebesgue systems read PRNG
    bits/words directly, the logistic map uses the arcsine inverse CDF,
    and LSV starts uniform with a burn-in to be discarded by the caller.
    """
    sid = system.id
    if sid in (SystemId.DOUBLING, SystemId.TENT):
        # the reservoir owns the stream from here on; hand back None so the
        # consumed words cannot be reused by accident
        return bit_state_from_rng(rng_state), 0, None
    if sid is SystemId.CATMAP:
        ux, rng_state = _rng.next_word(rng_state)
        uy, rng_state = _rng.next_word(rng_state)
        return OrbitState(pair=(ux, uy)), 0, rng_state
    u, rng_state = _rng.next_double(rng_state)
    if sid is SystemId.LOGISTIC:
        x = math.sin(math.pi * u / 2.0) ** 2
        return float_state(x), 0, rng_state
    return float_state(u), DEFAULT_BURN_IN, rng_state
