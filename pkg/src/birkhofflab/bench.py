"""Benchmark the jitted kernels against the pure-Python fallback.

Runs each system's streaming kernel both ways on the same seed, checks the
outputs agree exactly, and prints a timing table.  The pure path is what
``BIRKHOFFLAB_DISABLE_JIT=1`` selects for the whole package.

    python -m birkhofflab.bench [--n 100000]
"""

import argparse
import sys
import time

import numpy as np

from . import _rng, accumulate
from ._jit import JIT_ENABLED, pure
from ._kernels import run_dyadic_orbit, run_interval_orbit, run_torus_orbit
from .dynamics import (
    catmap_system,
    doubling_system,
    initial_state,
    logistic_system,
    lsv_system,
    tent_system,
)
from .measure import build_schedule
from .observables import ObservableSpec


def _orbit_args(system, p, k, n, seed):
    schedule = build_schedule("radius_power", system, p, n, c=0.25)
    obs = ObservableSpec.power(system.validate_point(p), k, system)
    ckpts = accumulate.checkpoint_times(n)
    nc = ckpts.size
    outs = (
        np.zeros(nc),
        np.zeros(nc),
        np.zeros(nc),
        np.zeros(nc, dtype=np.int64),
        np.zeros(nc, dtype=np.int64),
        np.zeros((nc, accumulate.TOP_KEEP)),
    )
    state, burn, _ = initial_state(system, _rng.xoshiro_state(seed))
    sk, sc, sbeta, sgamma, jstar, mustar, inv_d = schedule.kernel_params
    mm = schedule.model.kernel_params
    pt = system.validate_point(p)
    if system.id.value in ("lsv", "logistic"):
        map_id = 0 if system.id.value == "lsv" else 1
        args = (map_id, system.alpha, state.float_value, burn, pt[0],
                obs.kernel_kind, k, sk, sc, sbeta, sgamma, jstar, mustar,
                inv_d, *mm, n, ckpts)
        kernel = run_interval_orbit
    elif system.id.value in ("doubling", "tent"):
        tent = 1 if system.id.value == "tent" else 0
        args = (tent, state.window, state.flip, state.pend0, state.cnt0,
                state.pend1, *state.rng, pt[0], obs.kernel_kind, k,
                sk, sc, sbeta, sgamma, jstar, mustar, inv_d, *mm, n, ckpts)
        kernel = run_dyadic_orbit
    else:
        args = (state.pair[0], state.pair[1], pt[0], pt[1], obs.kernel_kind,
                k, sk, sc, sbeta, sgamma, jstar, mustar, inv_d, n, ckpts)
        kernel = run_torus_orbit
    return kernel, args, outs


def _fresh_outs(outs):
    return tuple(np.zeros_like(o) for o in outs)


def bench_system(name, system, p, k, n, seed=2024):
    kernel, args, outs = _orbit_args(system, p, k, n, seed)

    jit_outs = _fresh_outs(outs)
    kernel(*args, *jit_outs)  # warm-up/compile
    jit_outs = _fresh_outs(outs)
    t0 = time.perf_counter()
    kernel(*args, *jit_outs)
    t_jit = time.perf_counter() - t0

    pure_kernel = pure(kernel)
    pure_outs = _fresh_outs(outs)
    t0 = time.perf_counter()
    pure_kernel(*args, *pure_outs)
    t_pure = time.perf_counter() - t0

    identical = all(
        np.array_equal(a, b, equal_nan=True) for a, b in zip(jit_outs, pure_outs)
    )
    return t_jit, t_pure, identical


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=100_000, help="steps per orbit")
    args = parser.parse_args(argv)
    n = max(args.n, 1_000)

    cases = [
        ("doubling", doubling_system(), 0.618, 2.0),
        ("tent", tent_system(), 0.3, 2.0),
        ("lsv a=0.5", lsv_system(0.5), 0.3, 1.0),
        ("logistic", logistic_system(), 0.3, 2.0),
        ("catmap", catmap_system(), (0.3, 0.7), 4.0),
    ]
    print("jit enabled in this process: %s" % JIT_ENABLED)
    print("%-12s %12s %12s %9s %8s" % ("system", "jit s", "pure s", "speedup", "equal"))
    ok = True
    for name, system, p, k in cases:
        t_jit, t_pure, identical = bench_system(name, system, p, k, n)
        ok = ok and identical
        print(
            "%-12s %12.4f %12.4f %8.1fx %8s"
            % (name, t_jit, t_pure, t_pure / max(t_jit, 1e-12), identical)
        )
    if not ok:
        print("MISMATCH between jit and pure outputs", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
