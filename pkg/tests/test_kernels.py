"""The jitted kernels and their pure-Python twins must agree bit for bit."""

import subprocess
import sys

import numpy as np
import pytest

from birkhofflab import _rng, accumulate
from birkhofflab._jit import JIT_ENABLED, pure
from birkhofflab._kernels import (
    MAP_LSV,
    MM_LEBESGUE_1D,
    OBS_POWER,
    SCHED_RADIUS_POWER,
    escape_steps,
    run_dyadic_orbit,
    run_interval_orbit,
    run_torus_orbit,
    step_dyadic,
    step_lsv,
    step_torus,
)
from birkhofflab.dynamics import (
    catmap_system,
    doubling_system,
    initial_state,
    lsv_system,
    tent_system,
)
from birkhofflab.measure import build_schedule
from birkhofflab.observables import ObservableSpec

N_STEPS = 20_000


def _outs(nc):
    return (
        np.zeros(nc),
        np.zeros(nc),
        np.zeros(nc),
        np.zeros(nc, dtype=np.int64),
        np.zeros(nc, dtype=np.int64),
        np.zeros((nc, 64)),
    )


def _run_both(kernel, args, nc):
    jit_outs = _outs(nc)
    ret_jit = kernel(*args, *jit_outs)
    pure_outs = _outs(nc)
    ret_pure = pure(kernel)(*args, *pure_outs)
    assert tuple(int(v) for v in ret_jit) == tuple(int(v) for v in ret_pure)
    for a, b in zip(jit_outs, pure_outs):
        assert np.array_equal(a, b, equal_nan=True)
    return jit_outs


def _kernel_setup(system, p, k, n, seed):
    schedule = build_schedule("radius_power", system, p, n, c=0.25)
    obs = ObservableSpec.power(system.validate_point(p), k, system)
    ckpts = accumulate.checkpoint_times(n)
    state, burn, _ = initial_state(system, _rng.xoshiro_state(seed))
    sk, sc, sbeta, sgamma, jstar, mustar, inv_d = schedule.kernel_params
    mm = schedule.model.kernel_params
    pt = system.validate_point(p)
    return obs, ckpts, state, burn, (sk, sc, sbeta, sgamma, jstar, mustar, inv_d), mm, pt


def test_interval_kernel_jit_pure_identical():
    system = lsv_system(0.5)
    obs, ckpts, state, burn, sched, mm, pt = _kernel_setup(system, 0.3, 1.0, N_STEPS, 77)
    args = (MAP_LSV, 0.5, state.float_value, burn, pt[0], OBS_POWER, 1.0,
            *sched, *mm, N_STEPS, ckpts)
    _run_both(run_interval_orbit, args, ckpts.size)


def test_dyadic_kernel_jit_pure_identical():
    for system, tent in ((doubling_system(), 0), (tent_system(), 1)):
        obs, ckpts, state, burn, sched, mm, pt = _kernel_setup(system, 0.618, 2.0, N_STEPS, 78)
        args = (tent, state.window, state.flip, state.pend0, state.cnt0,
                state.pend1, *state.rng, pt[0], OBS_POWER, 2.0, *sched, *mm,
                N_STEPS, ckpts)
        _run_both(run_dyadic_orbit, args, ckpts.size)


def test_torus_kernel_jit_pure_identical():
    system = catmap_system()
    obs, ckpts, state, burn, sched, mm, pt = _kernel_setup(system, (0.3, 0.7), 4.0, N_STEPS, 79)
    args = (state.pair[0], state.pair[1], pt[0], pt[1], OBS_POWER, 4.0,
            *sched, N_STEPS, ckpts)
    _run_both(run_torus_orbit, args, ckpts.size)


def test_leaf_kernels_jit_pure_identical():
    assert step_lsv(0.3, 0.5) == pure(step_lsv)(0.3, 0.5)
    w = np.uint64(0x9ABCDEF012345678)
    z = np.uint64(0)
    jit_res = step_dyadic(w, z, np.uint64(123), 17, np.uint64(456),
                          np.uint64(1), np.uint64(2), np.uint64(3), np.uint64(4), 1)
    pure_res = pure(step_dyadic)(w, z, np.uint64(123), 17, np.uint64(456),
                                 np.uint64(1), np.uint64(2), np.uint64(3), np.uint64(4), 1)
    assert tuple(int(v) for v in jit_res) == tuple(int(v) for v in pure_res)
    assert tuple(int(v) for v in step_torus(w, w)) == tuple(
        int(v) for v in pure(step_torus)(w, w)
    )
    assert escape_steps(0.5, 1e-4, 0.25) == pure(escape_steps)(0.5, 1e-4, 0.25)


@pytest.mark.skipif(not JIT_ENABLED, reason="already running without jit")
def test_env_flag_selects_pure_path_with_identical_results():
    # a fresh interpreter with BIRKHOFFLAB_DISABLE_JIT=1 must reproduce the
    # jitted Birkhoff sum exactly
    import birkhofflab as bl
    from birkhofflab.measure import build_schedule as bs

    system = doubling_system()
    sched = bs("radius_power", system, 0.618, 2000, c=0.25)
    obs = ObservableSpec.power(system.validate_point(0.618), 2.0, system)
    res = bl.run_orbit(system, obs, sched, 2000, 4711)
    expected = repr((res.checkpoints[-1].S_n, res.checkpoints[-1].hits))

    code = (
        "import birkhofflab as bl\n"
        "from birkhofflab.measure import build_schedule\n"
        "assert not bl.JIT_ENABLED\n"
        "s = bl.doubling_system()\n"
        "sched = build_schedule('radius_power', s, 0.618, 2000, c=0.25)\n"
        "obs = bl.ObservableSpec.power(s.validate_point(0.618), 2.0, s)\n"
        "r = bl.run_orbit(s, obs, sched, 2000, 4711)\n"
        "print(repr((r.checkpoints[-1].S_n, r.checkpoints[-1].hits)))\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "BIRKHOFFLAB_DISABLE_JIT": "1"},
        check=True,
    )
    assert out.stdout.strip() == expected


def test_bench_module_smoke():
    from birkhofflab.bench import bench_system
    from birkhofflab.dynamics import doubling_system

    t_jit, t_pure, identical = bench_system("doubling", doubling_system(), 0.618, 2.0, 2000)
    assert identical
    assert t_jit > 0.0 and t_pure > 0.0
