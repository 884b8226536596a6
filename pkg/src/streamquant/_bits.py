"""64-bit mixing primitives shared by the seeded components.

splitmix64 state advance + finalizer: portable, seedable, and free of
rejection loops, so consumers draw a fixed number of words per event.
"""

import numpy as np
from numba import njit

U64 = np.uint64
MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def mix64(z):
    """splitmix64 finalizer."""
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def next64(state):
    """Advance a one-element uint64 state array and return the next word."""
    state[0] = (state[0] + GAMMA) & MASK64
    return mix64(state[0])


@njit(cache=True, inline="always")
def u01(word):
    """Map a 64-bit word to a double in the open interval (0, 1)."""
    return (np.float64(word >> U64(11)) + 0.5) * (1.0 / 9007199254740992.0)
