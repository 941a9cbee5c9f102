"""Single-orbit streaming: statistics at geometric checkpoints, exponent fits.

An orbit is one sequential task: the initial state is drawn from the
invariant measure (exactly where possible, by burn-in for LSV), the map is
iterated n_max times, and the observable is accumulated with compensated
summation starting at the first image (the j=0 term is excluded).
Checkpoints follow a geometric schedule (default ratio 10^(1/8), about
eight per decade) so trailing-decade regressions have enough points at
O(log n) storage.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels, _rng
from .dynamics import (
    OrbitState,
    Representation,
    SystemDescriptor,
    SystemId,
    initial_state,
)
from .measure import TargetSchedule, effective_dimension
from .observables import ObservableKind, ObservableSpec

DEFAULT_CHECKPOINT_RATIO = 10.0 ** 0.125
DEFAULT_DELTA = 0.1
DEFAULT_ETA = 0.1
TOP_KEEP = _kernels.TOP_KEEP

_STATUS_NAMES = {
    _kernels.STATUS_OK: "ok",
    _kernels.STATUS_OVERFLOW: "overflow",
    _kernels.STATUS_DOMAIN: "domain",
}


class InsufficientDataError(ValueError):
    """Too few checkpoints for the requested estimate."""


def checkpoint_times(n_max: int, ratio: float = DEFAULT_CHECKPOINT_RATIO) -> np.ndarray:
    """Strictly increasing rounded geometric times, always ending at n_max."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if not ratio > 1.0:
        raise ValueError("checkpoint_ratio must exceed 1")
    ns = []
    m = 1
    while True:
        n = round(ratio ** m)
        if n > n_max:
            break
        if n >= 1 and (not ns or n > ns[-1]):
            ns.append(n)
        m += 1
    if not ns or ns[-1] != n_max:
        ns.append(n_max)
    return np.asarray(ns, dtype=np.int64)


@dataclass
class CheckpointRecord:
    """Snapshot of every running statistic at orbit time n."""

    n: int
    S_n: float
    M_n: float = 0.0
    hits: int = 0
    E_n: float = 0.0
    last_hit_index: int = 0
    top_terms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    aaronson_ratio: float = math.nan


@dataclass
class RunResult:
    """Everything one orbit produced, deterministic given (seed, config)."""

    seed: int
    system: SystemDescriptor
    observable: ObservableSpec
    schedule: TargetSchedule
    n_max: int
    checkpoints: List[CheckpointRecord]
    exponent_estimate: float
    exponent_pointwise: float
    sbc_ratio_series: np.ndarray
    qsbc_residual_series: np.ndarray
    status: str = "ok"
    steps_completed: int = 0
    delta: float = DEFAULT_DELTA
    eta: float = DEFAULT_ETA
    #: fraction of checkpoints with S_n >= (n log n)^q, q the predicted
    #: exponent; reported without an acceptance threshold
    occupation_fraction: float = math.nan


def pointwise_exponent(record: CheckpointRecord) -> float:
    """log S_n / log n at one checkpoint."""
    if record.n < 2 or record.S_n <= 0.0:
        return math.nan
    return math.log(record.S_n) / math.log(record.n)


def estimate_exponent(checkpoints: Sequence[CheckpointRecord]) -> float:
    """Least-squares slope of log S_n against log n over the trailing decade.

    Uses checkpoints with n >= n_final/10; raises InsufficientDataError
    below 4 points.
    """
    if len(checkpoints) == 0:
        raise InsufficientDataError("no checkpoints")
    n_final = checkpoints[-1].n
    xs, ys = [], []
    for rec in checkpoints:
        if rec.n * 10 >= n_final and rec.S_n > 0.0:
            xs.append(math.log(rec.n))
            ys.append(math.log(rec.S_n))
    if len(xs) < 4:
        raise InsufficientDataError(
            "need >= 4 checkpoints in the trailing decade, got %d" % len(xs)
        )
    xbar = math.fsum(xs) / len(xs)
    ybar = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - xbar) ** 2 for x in xs)
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    return sxy / sxx


def trimmed_sum(record: CheckpointRecord, b: int) -> float:
    """S_n minus its b largest terms (b up to the retained heap size)."""
    if b < 0:
        raise ValueError("b must be nonnegative")
    if b > TOP_KEEP:
        raise ValueError("trimming depth b=%d exceeds the retained %d terms" % (b, TOP_KEEP))
    if b == 0:
        return record.S_n
    top = record.top_terms[: min(b, record.top_terms.size)]
    return record.S_n - math.fsum(float(v) for v in top)


def escape_time(alpha: float, m: int, gamma: float, epsilon0: float) -> int:
    """Iterates needed to leave [0, epsilon0] after injection at depth m^-gamma.

    Starts at x = 1/2 + 1/(2 m^gamma); one map step lands at m^-gamma, then
    steps are counted until the orbit exits the region.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("escape times need alpha in (0, 1)")
    if m < 2:
        raise ValueError("escape times need m >= 2")
    if gamma < 1.0:
        raise ValueError("escape times need gamma >= 1")
    if not 0.0 < epsilon0 < 0.5:
        raise ValueError("escape times need epsilon0 in (0, 1/2)")
    depth = float(m) ** (-gamma)
    x = 0.5 + 0.5 * depth
    x = float(_kernels.step_lsv(x, alpha))
    return int(_kernels.escape_steps(alpha, x, epsilon0))


def mn_fluctuation(checkpoints: Sequence[CheckpointRecord], scaling_exponent: float) -> float:
    """max/min of M_n / n^scaling_exponent over checkpoints with n >= 1e4.

    Large ratios illustrate that M_n/u(n) admits no almost-sure limit.
    Falls back to all checkpoints when none reach 1e4.
    """
    if len(checkpoints) < 8:
        raise InsufficientDataError("mn_fluctuation needs >= 8 checkpoints")
    scaled = [
        rec.M_n / float(rec.n) ** scaling_exponent
        for rec in checkpoints
        if rec.n >= 10_000
    ]
    if not scaled:
        scaled = [rec.M_n / float(rec.n) ** scaling_exponent for rec in checkpoints]
    lo = min(scaled)
    if lo <= 0.0:
        return math.inf
    return max(scaled) / lo


def aaronson_ratio(s_n: float, n: int, a_exp: float, eta: float) -> float:
    """a(S_n)/n for a(x) = x^a_exp / (log x)^(1+eta); the diagnostic of the
    almost-sure upper rate (it must drift to 0 along the orbit)."""
    if math.isnan(a_exp) or s_n <= 0.0 or n <= 0:
        return math.nan
    denom = math.log(s_n) ** (1.0 + eta) if s_n > math.e else 1.0
    return s_n ** a_exp / denom / n


# ---------------------------------------------------------------------------
# the orbit runner
# ---------------------------------------------------------------------------

def _kernel_dispatch(system, observable, schedule, n_max, burn,
                     state: OrbitState, ckpts, outs):
    obs_kind = observable.kernel_kind
    k = observable.k
    p = observable.p
    sk, sc, sbeta, sgamma, jstar, mustar, inv_d = schedule.kernel_params
    mm_id, mm_c, mm_e, mm_grid = schedule.model.kernel_params
    out_s, out_m, out_e, out_hits, out_last, out_top = outs

    rep = system.representation
    if rep is Representation.FLOAT64:
        map_id = _kernels.MAP_LSV if system.id is SystemId.LSV else _kernels.MAP_LOGISTIC
        status, steps, filled, _ = _kernels.run_interval_orbit(
            map_id, system.alpha, state.float_value, burn, p[0],
            obs_kind, k, sk, sc, sbeta, sgamma, jstar, mustar, inv_d,
            mm_id, mm_c, mm_e, mm_grid,
            n_max, ckpts, out_s, out_m, out_e, out_hits, out_last, out_top,
        )
        return status, steps, filled
    if rep is Representation.BIT_RESERVOIR:
        tent = 1 if system.id is SystemId.TENT else 0
        status, steps, filled = _kernels.run_dyadic_orbit(
            tent, state.window, state.flip, state.pend0, state.cnt0,
            state.pend1, state.rng[0], state.rng[1], state.rng[2], state.rng[3],
            p[0], obs_kind, k, sk, sc, sbeta, sgamma, jstar, mustar, inv_d,
            mm_id, mm_c, mm_e, mm_grid,
            n_max, ckpts, out_s, out_m, out_e, out_hits, out_last, out_top,
        )
        return status, steps, filled
    status, steps, filled = _kernels.run_torus_orbit(
        state.pair[0], state.pair[1], p[0], p[1],
        obs_kind, k, sk, sc, sbeta, sgamma, jstar, mustar, inv_d,
        n_max, ckpts, out_s, out_m, out_e, out_hits, out_last, out_top,
    )
    return status, steps, filled


def run_orbit(
    system: SystemDescriptor,
    observable: ObservableSpec,
    schedule: TargetSchedule,
    n_max: int,
    seed: int,
    checkpoint_ratio: float = DEFAULT_CHECKPOINT_RATIO,
    delta: float = DEFAULT_DELTA,
    eta: float = DEFAULT_ETA,
) -> RunResult:
    """Stream one orbit and snapshot statistics at geometric checkpoints.

    Deterministic given (seed, configuration).  On Birkhoff-sum overflow
    (S_n > 1e300) the orbit aborts and the partial checkpoints are returned
    with status "overflow".
    """
    if n_max < 1_000:
        raise ValueError("run_orbit needs n_max >= 1000")
    if schedule.system.id is not system.id:
        raise ValueError("schedule was built for a different system")

    ckpts = checkpoint_times(n_max, checkpoint_ratio)
    nc = ckpts.size
    out_s = np.zeros(nc)
    out_m = np.zeros(nc)
    out_e = np.zeros(nc)
    out_hits = np.zeros(nc, dtype=np.int64)
    out_last = np.zeros(nc, dtype=np.int64)
    out_top = np.zeros((nc, TOP_KEEP))

    rng_state = _rng.xoshiro_state(seed)
    state, burn, rng_state = initial_state(system, rng_state)
    status, steps, filled = _kernel_dispatch(
        system, observable, schedule, n_max, burn, state, ckpts,
        (out_s, out_m, out_e, out_hits, out_last, out_top),
    )

    if observable.kind is ObservableKind.POWER_DISTANCE:
        a_exp = effective_dimension(system, observable.p) / observable.k
    else:
        a_exp = math.nan

    records: List[CheckpointRecord] = []
    for i in range(filled):
        count = min(int(ckpts[i]), TOP_KEEP)
        tops = np.sort(out_top[i, :count])[::-1].copy()
        records.append(
            CheckpointRecord(
                n=int(ckpts[i]),
                S_n=float(out_s[i]),
                M_n=float(out_m[i]),
                hits=int(out_hits[i]),
                E_n=float(out_e[i]),
                last_hit_index=int(out_last[i]),
                top_terms=tops,
                aaronson_ratio=aaronson_ratio(float(out_s[i]), int(ckpts[i]), a_exp, eta),
            )
        )

    if records:
        pointwise = pointwise_exponent(records[-1])
        try:
            slope = estimate_exponent(records)
        except InsufficientDataError:
            slope = pointwise
        e_arr = np.array([r.E_n for r in records])
        h_arr = np.array([r.hits for r in records], dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            sbc = np.where(e_arr > 0.0, h_arr / e_arr, math.nan)
            qsbc = np.where(
                e_arr > 0.0, (h_arr - e_arr) / e_arr ** (0.5 + delta), math.nan
            )
        if not math.isnan(a_exp) and a_exp > 0.0:
            # S_n >= (n log n)^q compared in log space to dodge overflow
            q = 1.0 / a_exp  # predicted growth exponent k/D_eff
            occ = [
                math.log(r.S_n) >= q * math.log(r.n * math.log(r.n))
                for r in records
                if r.n >= 2 and r.S_n > 0.0
            ]
            occupation = sum(occ) / len(occ) if occ else math.nan
        else:
            occupation = math.nan
    else:
        pointwise = math.nan
        slope = math.nan
        sbc = np.zeros(0)
        qsbc = np.zeros(0)
        occupation = math.nan

    return RunResult(
        seed=int(seed),
        system=system,
        observable=observable,
        schedule=schedule,
        n_max=int(n_max),
        checkpoints=records,
        exponent_estimate=float(slope),
        exponent_pointwise=float(pointwise),
        sbc_ratio_series=sbc,
        qsbc_residual_series=qsbc,
        status=_STATUS_NAMES.get(int(status), "unknown"),
        steps_completed=int(steps),
        delta=delta,
        eta=eta,
        occupation_fraction=float(occupation),
    )
