"""Property tests of the core invariants (hypothesis-driven)."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhofflab import _kernels
from birkhofflab.dynamics import (
    bit_state_from_fraction,
    catmap_inverse,
    catmap_step,
    doubling_step,
    fixed_state,
    lsv_step,
    logistic_step,
    tent_step,
)
from birkhofflab.measure import (
    BallMeasureModel,
    MeasureRegime,
    mu_ball,
    radius_for_measure,
)

UNIT = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
ALPHA = st.floats(min_value=0.0, max_value=0.999, allow_nan=False)
WORD = st.integers(min_value=0, max_value=2**64 - 1)

MODELS = st.sampled_from(
    [
        (BallMeasureModel(MeasureRegime.LEBESGUE_1D), 0.0),
        (BallMeasureModel(MeasureRegime.LEBESGUE_1D), 0.37),
        (BallMeasureModel(MeasureRegime.ARCSINE), 0.0),
        (BallMeasureModel(MeasureRegime.ARCSINE), 0.62),
        (BallMeasureModel(MeasureRegime.LEBESGUE_TORUS), (0.25, 0.8)),
    ]
)


@settings(max_examples=300, deadline=None)
@given(x=UNIT, alpha=ALPHA)
def test_lsv_image_stays_in_interval(x, alpha):
    assert 0.0 <= lsv_step(x, alpha) <= 1.0


@settings(max_examples=300, deadline=None)
@given(x=UNIT)
def test_logistic_image_stays_in_interval(x):
    assert 0.0 <= logistic_step(x) <= 1.0


@settings(max_examples=200, deadline=None)
@given(x=st.floats(min_value=0.0, max_value=0.499), alpha=ALPHA)
def test_lsv_left_branch_expands(x, alpha):
    # the left branch moves points right (indifferent fixed point at 0);
    # strictly so once x*(2x)^alpha clears the rounding floor, i.e. for
    # x >= ~2^-53 at any alpha < 1 (orbits never reach deeper: entry
    # depths scale like 1/n)
    y = lsv_step(x, alpha)
    assert y >= x
    if x >= 1e-15:
        assert y > x


@settings(max_examples=200, deadline=None)
@given(ux=WORD, uy=WORD)
def test_catmap_round_trips_exactly(ux, uy):
    st_ = fixed_state(ux, uy)
    assert catmap_inverse(catmap_step(st_)).pair == st_.pair
    assert catmap_step(catmap_inverse(st_)).pair == st_.pair


@settings(max_examples=100, deadline=None)
@given(num=st.integers(min_value=0, max_value=2**60 - 1), steps=st.integers(1, 60))
def test_doubling_exact_on_dyadics(num, steps):
    x = Fraction(num, 2**60)
    st_ = bit_state_from_fraction(x)
    r = x
    for _ in range(steps):
        st_ = doubling_step(st_)
        r = (2 * r) % 1
    assert Fraction(int(st_.window) + int(st_.flip), 2**64) == r


@settings(max_examples=100, deadline=None)
@given(num=st.integers(min_value=0, max_value=2**60 - 1), steps=st.integers(1, 60))
def test_tent_exact_on_dyadics(num, steps):
    x = Fraction(num, 2**60)
    st_ = bit_state_from_fraction(x)
    r = x
    for _ in range(steps):
        st_ = tent_step(st_)
        r = 2 * r if r < Fraction(1, 2) else 2 - 2 * r
    assert Fraction(int(st_.window) + int(st_.flip), 2**64) == r


@settings(max_examples=200, deadline=None)
@given(pair=MODELS, r1=st.floats(1e-9, 0.7), r2=st.floats(1e-9, 0.7))
def test_mu_ball_monotone(pair, r1, r2):
    model, p = pair
    lo, hi = sorted((r1, r2))
    assert mu_ball(model, p, lo) <= mu_ball(model, p, hi) + 1e-15
    assert 0.0 <= mu_ball(model, p, lo) <= 1.0


@settings(max_examples=100, deadline=None)
@given(pair=MODELS, target=st.floats(1e-8, 0.95))
def test_radius_for_measure_inverts(pair, target):
    model, p = pair
    r = radius_for_measure(model, p, target)
    # CDF differencing at interior p has an absolute noise floor of a few
    # ulp of F(p), so tiny targets cannot beat ~1e-15 absolute
    assert abs(mu_ball(model, p, r) - target) <= max(1e-9 * target, 1e-15)


@settings(max_examples=200, deadline=None)
@given(d=st.floats(2.0**-63, 1.0), k=st.floats(0.1, 8.0))
def test_observable_power_log_consistency(d, k):
    power = _kernels.observable_value(_kernels.OBS_POWER, d, k)
    logv = _kernels.observable_value(_kernels.OBS_LOG, d, 1.0)
    assert power > 0.0
    assert math.isfinite(power)
    assert abs(power - math.exp(k * logv)) <= 1e-12 * power


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.floats(1e-10, 1e10), min_size=1, max_size=400))
def test_kbn_matches_fsum(values):
    s = 0.0
    c = 0.0
    for v in values:
        s, c = _kernels.kbn_add(s, c, v)
    total = s + c
    exact = math.fsum(values)
    assert abs(total - exact) <= 1e-13 * abs(exact)


@settings(max_examples=200, deadline=None)
@given(x=UNIT, y=UNIT, px=UNIT, py=UNIT)
def test_torus_distance_properties(x, y, px, py):
    d = _kernels.dist_torus(x, y, px, py)
    assert 2.0**-63 <= d <= math.sqrt(0.5) + 1e-12
    # symmetry
    assert d == _kernels.dist_torus(px, py, x, y)
