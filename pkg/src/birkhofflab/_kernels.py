"""Hot orbit-streaming kernels.

One kernel per state representation (float interval maps, exact bit-stream
dyadic maps, exact fixed-point torus map).  Each streams a single orbit for
``n_max`` steps, evaluating the observable after every step, accumulating
the Birkhoff sum with compensated (Kahan-Babuska-Neumaier) summation,
testing shrinking-target membership at step j against ball B_j, and
snapshotting statistics at the supplied checkpoint times.

The kernels are jitted through :mod:`birkhofflab._jit`; with
``BIRKHOFFLAB_DISABLE_JIT=1`` the same source runs as plain Python over
numpy uint64 scalars and produces bit-identical results.

Integer-code conventions shared with the rest of the package:

* map:       0 = LSV, 1 = logistic
* observable: 0 = power distance d^-k, 1 = -log d
* schedule:  0 = radius power r_j = c j^(-1/D)
             1 = measure harmonic mu_j = min(1, c log^beta(j)/j)
             2 = one-sided origin target [0, j^-gamma)
* measure:   0 = Lebesgue on [0,1], 2 = arcsine CDF, 3 = origin power law
             c x^e, 4 = empirical CDF on a uniform grid (2-D torus area is
             hard-wired in the torus kernel)

Status codes returned by the streaming kernels: 0 = completed,
1 = Birkhoff sum overflow (> 1e300), 2 = state left [0,1].
"""

import math

import numpy as np

from ._jit import njit
from ._rng import xoshiro_next

MAP_LSV = 0
MAP_LOGISTIC = 1

OBS_POWER = 0
OBS_LOG = 1

SCHED_RADIUS_POWER = 0
SCHED_MEASURE_HARMONIC = 1
SCHED_ORIGIN_KIM = 2

MM_LEBESGUE_1D = 0
MM_LEBESGUE_TORUS = 1
MM_ARCSINE = 2
MM_ORIGIN_POWER = 3
MM_EMPIRICAL = 4

STATUS_OK = 0
STATUS_OVERFLOW = 1
STATUS_DOMAIN = 2

#: smallest reported distance; keeps phi finite on an exact hit
DIST_CLAMP = 2.0 ** -63
#: Birkhoff sums beyond this abort the orbit with STATUS_OVERFLOW
OVERFLOW_LIMIT = 1.0e300
#: retained largest observable values (trimmed sums read from this heap)
TOP_KEEP = 64

TWO_NEG64 = 2.0 ** -64
TWO_OVER_PI = 2.0 / math.pi
ROOT_HALF = math.sqrt(0.5)

_U1 = np.uint64(1)
_U17 = np.uint64(17)
_U19 = np.uint64(19)
_U23 = np.uint64(23)
_U41 = np.uint64(41)
_U45 = np.uint64(45)
_U63 = np.uint64(63)


# ---------------------------------------------------------------------------
# single-step map actions
# ---------------------------------------------------------------------------

@njit
def step_lsv(x, alpha):
    """One LSV step: x + 2^alpha x^(1+alpha) left of 1/2, else 2x - 1.

    The left branch is evaluated as x + x*(2x)^alpha, which is algebraically
    identical and keeps the image inside [0,1] in floating point (at x=1/2
    it yields exactly 1.0 since (2x)^alpha = 1).
    """
    if x <= 0.5:
        return x + x * (2.0 * x) ** alpha
    return 2.0 * x - 1.0


@njit
def step_logistic(x):
    """One logistic step 4x(1-x), grouped as 4*(x*(1-x)) so the image
    cannot round above 1.0."""
    return 4.0 * (x * (1.0 - x))


@njit
def step_dyadic(window, flip, pend0, cnt0, pend1, s0, s1, s2, s3, tent):
    """Advance a bit-reservoir point one step of the doubling or tent map.

    ``window`` holds the leading 64 effective digits (MSB first), ``flip``
    the pending complement of the incoming raw bits, ``pend0``/``pend1``
    the next raw words (``cnt0`` bits left in pend0, pend1 always full),
    and s0..s3 the xoshiro256++ state that replenishes the tail.
    """
    bit = (pend0 >> _U63) ^ flip
    pend0 = pend0 << _U1
    cnt0 -= 1
    if cnt0 == 0:
        pend0 = pend1
        cnt0 = 64
        pend1, s0, s1, s2, s3 = xoshiro_next(s0, s1, s2, s3)
    out = window >> _U63
    window = (window << _U1) | bit
    if tent == 1 and out == _U1:
        window = ~window
        flip = flip ^ _U1
    return window, flip, pend0, cnt0, pend1, s0, s1, s2, s3


@njit
def step_torus(ux, uy):
    """Exact toral automorphism [[2,1],[1,1]] on 64-bit fixed point."""
    return ux + ux + uy, ux + uy


@njit
def step_torus_inverse(ux, uy):
    """Exact inverse [[1,-1],[-1,2]] of :func:`step_torus`."""
    return ux - uy, uy + uy - ux


# ---------------------------------------------------------------------------
# measures and distances
# ---------------------------------------------------------------------------

@njit
def cdf_1d(mm_id, x, mc, me, grid):
    """Model CDF F(x) on [0,1]; the argument is clamped into the interval.

    The origin power law (mm_id 3) is an asymptotic model: its mass tops
    out at min(1, mc) rather than being forced to 1 at x = 1.
    """
    if x <= 0.0:
        return 0.0
    if x > 1.0:
        x = 1.0
    if mm_id == 0:
        return x
    if mm_id == 2:
        return TWO_OVER_PI * math.asin(math.sqrt(x))
    if mm_id == 3:
        v = mc * x ** me
        return v if v < 1.0 else 1.0
    g = grid.shape[0] - 1
    t = x * g
    i = int(t)
    if i >= g:
        return grid[g]
    return grid[i] + (t - i) * (grid[i + 1] - grid[i])


@njit
def mu_interval_ball(mm_id, p, r, mc, me, grid):
    """Measure of the ball (p-r, p+r) intersected with [0,1]."""
    return cdf_1d(mm_id, p + r, mc, me, grid) - cdf_1d(mm_id, p - r, mc, me, grid)


@njit
def mu_torus_ball(r):
    """Lebesgue area of a min-wrap Euclidean ball on the unit 2-torus."""
    if r <= 0.0:
        return 0.0
    if r >= ROOT_HALF:
        return 1.0
    area = math.pi * r * r
    if r > 0.5:
        seg = r * r * math.acos(0.5 / r) - 0.5 * math.sqrt(r * r - 0.25)
        area -= 4.0 * seg
    return area


@njit
def dist_interval(x, p):
    d = abs(x - p)
    if d < DIST_CLAMP:
        d = DIST_CLAMP
    return d


@njit
def dist_torus(x, y, px, py):
    dx = abs(x - px)
    if dx > 0.5:
        dx = 1.0 - dx
    dy = abs(y - py)
    if dy > 0.5:
        dy = 1.0 - dy
    d = math.sqrt(dx * dx + dy * dy)
    if d < DIST_CLAMP:
        d = DIST_CLAMP
    return d


# ---------------------------------------------------------------------------
# small numeric helpers
# ---------------------------------------------------------------------------

@njit
def kbn_add(s, c, v):
    """Kahan-Babuska-Neumaier compensated add; returns (sum, compensation)."""
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit
def heap_offer(top, cnt, v):
    """Offer v to the bounded min-heap of largest values; returns new count."""
    size = top.shape[0]
    if cnt < size:
        i = cnt
        top[i] = v
        while i > 0:
            parent = (i - 1) // 2
            if top[parent] <= top[i]:
                break
            top[parent], top[i] = top[i], top[parent]
            i = parent
        return cnt + 1
    if v > top[0]:
        top[0] = v
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and top[left] < top[m]:
                m = left
            if right < size and top[right] < top[m]:
                m = right
            if m == i:
                break
            top[m], top[i] = top[i], top[m]
            i = m
    return cnt


@njit
def observable_value(obs_kind, d, k):
    if obs_kind == 0:
        return d ** (-k)
    return -math.log(d)


# ---------------------------------------------------------------------------
# streaming kernels
# ---------------------------------------------------------------------------

@njit
def run_interval_orbit(
    map_id,
    alpha,
    x0,
    burn,
    p,
    obs_kind,
    k,
    sched_kind,
    sc,
    sbeta,
    sgamma,
    s_jstar,
    s_mustar,
    inv_d,
    mm_id,
    mm_c,
    mm_e,
    mm_grid,
    n_max,
    ckpt_ns,
    out_s,
    out_m,
    out_e,
    out_hits,
    out_last,
    out_top,
):
    """Stream an LSV or logistic orbit; returns (status, steps, filled, x)."""
    x = x0
    for _ in range(burn):
        if map_id == 0:
            x = step_lsv(x, alpha)
        else:
            x = step_logistic(x)
        if x < 0.0 or x > 1.0:
            return STATUS_DOMAIN, 0, 0, x

    top = np.zeros(out_top.shape[1])
    top_cnt = 0
    s = 0.0
    s_c = 0.0
    e = 0.0
    e_c = 0.0
    m = 0.0
    hits = 0
    last = 0
    ci = 0
    next_ck = ckpt_ns[0] if ckpt_ns.shape[0] > 0 else -1

    for j in range(1, n_max + 1):
        if map_id == 0:
            x = step_lsv(x, alpha)
        else:
            x = step_logistic(x)
        if x < 0.0 or x > 1.0:
            return STATUS_DOMAIN, j, ci, x

        d = dist_interval(x, p)
        phi = observable_value(obs_kind, d, k)
        s, s_c = kbn_add(s, s_c, phi)
        # the raw sum is monotone for positive phi; testing it alone stays
        # robust when an infinite phi poisons the compensation term
        if s > OVERFLOW_LIMIT:
            return STATUS_OVERFLOW, j, ci, x
        if phi > m:
            m = phi
        top_cnt = heap_offer(top, top_cnt, phi)

        fj = 1.0 * j
        if sched_kind == 0:
            if inv_d == 1.0:
                r = sc / fj
            else:
                r = sc * fj ** (-inv_d)
            if d < r:
                hits += 1
                last = j
            mu = mu_interval_ball(mm_id, p, r, mm_c, mm_e, mm_grid)
        elif sched_kind == 1:
            if j <= s_jstar:
                mu = s_mustar
            else:
                if sbeta == 0.0:
                    lg = 1.0
                else:
                    lg = math.log(fj) ** sbeta
                mu = sc * lg / fj
                if mu > 1.0:
                    mu = 1.0
            if mu_interval_ball(mm_id, p, d, mm_c, mm_e, mm_grid) < mu:
                hits += 1
                last = j
        else:
            r = fj ** (-sgamma)
            if x < r:
                hits += 1
                last = j
            mu = mu_interval_ball(mm_id, 0.0, r, mm_c, mm_e, mm_grid)
        e, e_c = kbn_add(e, e_c, mu)

        if j == next_ck:
            out_s[ci] = s + s_c
            out_m[ci] = m
            out_e[ci] = e + e_c
            out_hits[ci] = hits
            out_last[ci] = last
            for t in range(top.shape[0]):
                out_top[ci, t] = top[t]
            ci += 1
            next_ck = ckpt_ns[ci] if ci < ckpt_ns.shape[0] else -1

    return STATUS_OK, n_max, ci, x


@njit
def run_dyadic_orbit(
    tent,
    window,
    flip,
    pend0,
    cnt0,
    pend1,
    s0,
    s1,
    s2,
    s3,
    p,
    obs_kind,
    k,
    sched_kind,
    sc,
    sbeta,
    sgamma,
    s_jstar,
    s_mustar,
    inv_d,
    mm_id,
    mm_c,
    mm_e,
    mm_grid,
    n_max,
    ckpt_ns,
    out_s,
    out_m,
    out_e,
    out_hits,
    out_last,
    out_top,
):
    """Stream a doubling or tent orbit on exact bit-stream state."""
    top = np.zeros(out_top.shape[1])
    top_cnt = 0
    s = 0.0
    s_c = 0.0
    e = 0.0
    e_c = 0.0
    m = 0.0
    hits = 0
    last = 0
    ci = 0
    next_ck = ckpt_ns[0] if ckpt_ns.shape[0] > 0 else -1

    for j in range(1, n_max + 1):
        # inlined step_dyadic: integer state stays in local uint64 scalars
        bit = (pend0 >> _U63) ^ flip
        pend0 = pend0 << _U1
        cnt0 -= 1
        if cnt0 == 0:
            pend0 = pend1
            cnt0 = 64
            tmp = s0 + s3
            pend1 = ((tmp << _U23) | (tmp >> _U41)) + s0
            t17 = s1 << _U17
            s2 = s2 ^ s0
            s3 = s3 ^ s1
            s1 = s1 ^ s2
            s0 = s0 ^ s3
            s2 = s2 ^ t17
            s3 = (s3 << _U45) | (s3 >> _U19)
        out_bit = window >> _U63
        window = (window << _U1) | bit
        if tent == 1 and out_bit == _U1:
            window = ~window
            flip = flip ^ _U1
        x = np.float64(window) * TWO_NEG64
        d = dist_interval(x, p)
        phi = observable_value(obs_kind, d, k)
        s, s_c = kbn_add(s, s_c, phi)
        # the raw sum is monotone for positive phi; testing it alone stays
        # robust when an infinite phi poisons the compensation term
        if s > OVERFLOW_LIMIT:
            return STATUS_OVERFLOW, j, ci
        if phi > m:
            m = phi
        top_cnt = heap_offer(top, top_cnt, phi)

        fj = 1.0 * j
        if sched_kind == 0:
            if inv_d == 1.0:
                r = sc / fj
            else:
                r = sc * fj ** (-inv_d)
            if d < r:
                hits += 1
                last = j
            mu = mu_interval_ball(mm_id, p, r, mm_c, mm_e, mm_grid)
        else:
            if j <= s_jstar:
                mu = s_mustar
            else:
                if sbeta == 0.0:
                    lg = 1.0
                else:
                    lg = math.log(fj) ** sbeta
                mu = sc * lg / fj
                if mu > 1.0:
                    mu = 1.0
            if mu_interval_ball(mm_id, p, d, mm_c, mm_e, mm_grid) < mu:
                hits += 1
                last = j
        e, e_c = kbn_add(e, e_c, mu)

        if j == next_ck:
            out_s[ci] = s + s_c
            out_m[ci] = m
            out_e[ci] = e + e_c
            out_hits[ci] = hits
            out_last[ci] = last
            for t in range(top.shape[0]):
                out_top[ci, t] = top[t]
            ci += 1
            next_ck = ckpt_ns[ci] if ci < ckpt_ns.shape[0] else -1

    return STATUS_OK, n_max, ci


@njit
def run_torus_orbit(
    ux,
    uy,
    px,
    py,
    obs_kind,
    k,
    sched_kind,
    sc,
    sbeta,
    sgamma,
    s_jstar,
    s_mustar,
    inv_d,
    n_max,
    ckpt_ns,
    out_s,
    out_m,
    out_e,
    out_hits,
    out_last,
    out_top,
):
    """Stream an orbit of the exact fixed-point toral automorphism."""
    top = np.zeros(out_top.shape[1])
    top_cnt = 0
    s = 0.0
    s_c = 0.0
    e = 0.0
    e_c = 0.0
    m = 0.0
    hits = 0
    last = 0
    ci = 0
    next_ck = ckpt_ns[0] if ckpt_ns.shape[0] > 0 else -1

    for j in range(1, n_max + 1):
        # inlined step_torus, for the same reason as above
        nx = ux + ux + uy
        uy = ux + uy
        ux = nx
        x = np.float64(ux) * TWO_NEG64
        y = np.float64(uy) * TWO_NEG64
        d = dist_torus(x, y, px, py)
        phi = observable_value(obs_kind, d, k)
        s, s_c = kbn_add(s, s_c, phi)
        # the raw sum is monotone for positive phi; testing it alone stays
        # robust when an infinite phi poisons the compensation term
        if s > OVERFLOW_LIMIT:
            return STATUS_OVERFLOW, j, ci
        if phi > m:
            m = phi
        top_cnt = heap_offer(top, top_cnt, phi)

        fj = 1.0 * j
        if sched_kind == 0:
            if inv_d == 1.0:
                r = sc / fj
            else:
                r = sc * fj ** (-inv_d)
            if d < r:
                hits += 1
                last = j
            mu = mu_torus_ball(r)
        else:
            if j <= s_jstar:
                mu = s_mustar
            else:
                if sbeta == 0.0:
                    lg = 1.0
                else:
                    lg = math.log(fj) ** sbeta
                mu = sc * lg / fj
                if mu > 1.0:
                    mu = 1.0
            if mu_torus_ball(d) < mu:
                hits += 1
                last = j
        e, e_c = kbn_add(e, e_c, mu)

        if j == next_ck:
            out_s[ci] = s + s_c
            out_m[ci] = m
            out_e[ci] = e + e_c
            out_hits[ci] = hits
            out_last[ci] = last
            for t in range(top.shape[0]):
                out_top[ci, t] = top[t]
            ci += 1
            next_ck = ckpt_ns[ci] if ci < ckpt_ns.shape[0] else -1

    return STATUS_OK, n_max, ci


# ---------------------------------------------------------------------------
# auxiliary kernels: escape times, histograms, tail counts
# ---------------------------------------------------------------------------

@njit
def escape_steps(alpha, x, eps0):
    """Iterate the LSV map until the state leaves [0, eps0]; count steps."""
    cnt = 0
    while x <= eps0:
        if x <= 0.5:
            x = x + x * (2.0 * x) ** alpha
        else:
            x = 2.0 * x - 1.0
        cnt += 1
    return cnt


@njit
def interval_histogram(map_id, alpha, x0, burn, n, counts):
    """Histogram of an interval-map orbit on uniform bins over [0,1]."""
    g = counts.shape[0]
    x = x0
    for _ in range(burn):
        if map_id == 0:
            x = step_lsv(x, alpha)
        else:
            x = step_logistic(x)
    for _ in range(n):
        if map_id == 0:
            x = step_lsv(x, alpha)
        else:
            x = step_logistic(x)
        i = int(x * g)
        if i >= g:
            i = g - 1
        counts[i] += 1
    return x


@njit
def lsv_tail_counts(alpha, x0, burn, n, thresholds, counts):
    """Count orbit points below each threshold (thresholds sorted ascending)."""
    x = x0
    for _ in range(burn):
        x = step_lsv(x, alpha)
    tmax = thresholds[thresholds.shape[0] - 1]
    for _ in range(n):
        x = step_lsv(x, alpha)
        if x < tmax:
            for t in range(thresholds.shape[0]):
                if x < thresholds[t]:
                    counts[t] += 1
    return x
