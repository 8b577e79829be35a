"""Minimal-standard Lehmer generator (Park-Miller) with Schrage's decomposition.

All randomness in the suite flows through this generator so that runs are
bit-reproducible across platforms. The state is kept in a one-element
``int64`` array so that the same stream can be advanced both from Python
(:class:`Rng`) and from the jit-compiled kernels (the ``_``-prefixed
functions below), which take the state array directly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MODULUS = 2147483647  # 2**31 - 1
MULTIPLIER = 16807
_Q = MODULUS // MULTIPLIER  # 127773
_R = MODULUS % MULTIPLIER  # 2836


def normalize_seed(seed: int) -> int:
    """Map an arbitrary integer onto a valid state in [1, 2**31 - 2]."""
    s = int(seed) % MODULUS
    return 1 if s == 0 else s


@njit(cache=True)
def _next(state):
    x = state[0]
    hi = x // _Q
    lo = x % _Q
    t = MULTIPLIER * lo - _R * hi
    if t <= 0:
        t += MODULUS
    state[0] = t
    return t


@njit(cache=True)
def _uniform(state):
    # open interval (0, 1): the state is never 0 and never equal to MODULUS
    return _next(state) / MODULUS


@njit(cache=True)
def _randint(state, k):
    return int(_uniform(state) * k)


@njit(cache=True)
def _normal(state):
    u1 = _uniform(state)
    u2 = _uniform(state)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True)
def _fill_bits(state, out):
    for i in range(out.size):
        out[i] = _randint(state, 2)


@njit(cache=True)
def _shuffle(state, arr):
    for i in range(arr.size - 1, 0, -1):
        j = _randint(state, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


class Rng:
    """Deterministic generator owned by exactly one run (not thread-safe).

    >>> r = Rng(1)
    >>> r.next(), r.next()
    (16807, 282475249)
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int = 1):
        self._state = np.array([normalize_seed(seed)], dtype=np.int64)

    @property
    def state(self) -> int:
        return int(self._state[0])

    @property
    def state_array(self) -> np.ndarray:
        """The live state buffer shared with the compiled kernels."""
        return self._state

    def copy(self) -> "Rng":
        return Rng(self.state)

    def next(self) -> int:
        return int(_next(self._state))

    def uniform(self) -> float:
        return float(_uniform(self._state))

    def __repr__(self) -> str:
        return f"Rng(state={self.state})"


def lcg_next(rng: Rng) -> int:
    """Advance the generator once and return the new state."""
    return rng.next()


def rand_uniform_int(rng: Rng, k: int) -> int:
    """Integer in [0, k - 1] computed as ``floor(u * k)``."""
    if k < 1:
        raise ValueError("empty range")
    return int(_randint(rng.state_array, k))


def rand_normal(rng: Rng) -> float:
    """Standard normal deviate by Box-Muller; consumes two uniforms, caches nothing."""
    return float(_normal(rng.state_array))


def rand_bitstring(rng: Rng, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f"bit string length must be positive, got {n}")
    out = np.empty(n, dtype=np.uint8)
    _fill_bits(rng.state_array, out)
    return out


def rand_permutation(rng: Rng, n: int) -> np.ndarray:
    """Uniform permutation of ``0..n-1`` (Fisher-Yates, descending sweep)."""
    if n < 1:
        raise ValueError(f"permutation size must be positive, got {n}")
    perm = np.arange(n, dtype=np.int64)
    _shuffle(rng.state_array, perm)
    return perm
