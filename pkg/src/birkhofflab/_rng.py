"""Deterministic pseudo-randomness: splitmix64 seeding + xoshiro256++ streams.

The orbit ensemble uses a documented counter scheme so any single orbit
can be replayed from the CSV alone:

* orbit ``i`` of a run has scalar seed ``seed_i = splitmix64_at(master_seed, i)``
  (the ``i``-th output of the splitmix64 stream started at ``master_seed``);
* its xoshiro256++ state is ``splitmix64_at(seed_i, 0..3)``.

All state is uint64 with wrapping arithmetic; constants live at module
level as np.uint64 so the jitted and pure paths type identically.
"""

import numpy as np

from ._jit import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U64 = np.uint64(64)

#: 2**-53, turns the top 53 bits of a word into a double in [0, 1).
DOUBLE_SCALE = 1.1102230246251565e-16

U64_MASK = 0xFFFFFFFFFFFFFFFF


@njit
def splitmix64_at(seed, index):
    """index-th output (0-based) of the splitmix64 stream seeded at `seed`."""
    state = seed + _GOLDEN * np.uint64(index + 1)
    z = state
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    return z ^ (z >> _U31)


@njit
def xoshiro_next(s0, s1, s2, s3):
    """One xoshiro256++ step: returns (output, s0, s1, s2, s3)."""
    tmp = s0 + s3
    out = ((tmp << _U23) | (tmp >> (_U64 - _U23))) + s0
    t = s1 << _U17
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << _U45) | (s3 >> (_U64 - _U45))
    return out, s0, s1, s2, s3


def orbit_seed(master_seed, index):
    """Scalar seed of ensemble orbit `index` (recorded in the CSV)."""
    return int(splitmix64_at(np.uint64(master_seed & U64_MASK), index))


def xoshiro_state(scalar_seed):
    """Expand a scalar seed into a nonzero xoshiro256++ state (4 np.uint64)."""
    s = np.uint64(scalar_seed & U64_MASK)
    state = tuple(np.uint64(splitmix64_at(s, j)) for j in range(4))
    if not any(int(w) for w in state):  # all-zero is xoshiro's fixed point
        state = (_GOLDEN, state[1], state[2], state[3])
    return state


def next_word(state):
    """Draw one uint64 word; returns (word, new_state) with numpy types."""
    out, s0, s1, s2, s3 = xoshiro_next(*state)
    return np.uint64(out), (np.uint64(s0), np.uint64(s1), np.uint64(s2), np.uint64(s3))


def next_double(state):
    """Draw a double uniform on [0, 1); returns (value, new_state)."""
    word, state = next_word(state)
    return float(int(word) >> 11) * DOUBLE_SCALE, state
