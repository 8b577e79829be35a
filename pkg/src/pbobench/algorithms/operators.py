"""Variation operators, samplers and adaptive-parameter updates.

Kernels (``_``-prefixed) take the raw generator state array and caller-owned
work buffers so the compiled run loops never allocate per offspring. The
public functions wrap them for use and testing from Python.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from pbobench.rng import Rng, _normal, _randint, _uniform

OUTCOMES = ("improved", "equal", "worse")


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _bin(state, n, p):
    """Bin(n, p) by sequential inversion; one uniform unless the pmf underflows."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    if p > 0.5:
        return n - _bin(state, n, 1.0 - p)
    q = 1.0 - p
    pmf = math.exp(n * math.log1p(-p))
    if pmf < 1e-300:
        k = 0
        for _ in range(n):
            if _uniform(state) < p:
                k += 1
        return k
    u = _uniform(state)
    ratio = p / q
    cum = pmf
    k = 0
    while u > cum and k < n:
        pmf *= (n - k) / (k + 1) * ratio
        k += 1
        cum += pmf
    return k


@njit(cache=True)
def _bin_gt0(state, n, p):
    """Bin(n, p) conditioned on a positive outcome."""
    if p <= 0.0:
        # limit of the conditional law as p -> 0
        return 1
    if p >= 1.0:
        return n
    zero = math.exp(n * math.log1p(-p))
    if zero <= 0.5:
        # resampling needs fewer than two draws on average
        while True:
            k = _bin(state, n, p)
            if k > 0:
                return k
    # invert the conditional pmf directly; bounded time for tiny p
    positive = -math.expm1(n * math.log1p(-p))
    q = 1.0 - p
    ratio = p / q
    pmf = n * p * math.exp((n - 1) * math.log1p(-p)) / positive
    u = _uniform(state)
    cum = pmf
    k = 1
    while u > cum and k < n:
        pmf *= (n - k) / (k + 1) * ratio
        k += 1
        cum += pmf
    return k


@njit(cache=True)
def _choose(state, n, ell, marks, pos):
    """Write ``ell`` distinct uniform positions of ``[0, n)`` into ``pos[:ell]``.

    ``marks`` must be all-zero on entry and is all-zero again on exit.
    """
    if 2 * ell <= n:
        k = 0
        while k < ell:
            j = _randint(state, n)
            if marks[j] == 0:
                marks[j] = 1
                pos[k] = j
                k += 1
        for k in range(ell):
            marks[pos[k]] = 0
    else:
        # pick the n - ell excluded positions instead
        k = 0
        while k < n - ell:
            j = _randint(state, n)
            if marks[j] == 0:
                marks[j] = 1
                k += 1
        k = 0
        for i in range(n):
            if marks[i]:
                marks[i] = 0
            else:
                pos[k] = i
                k += 1


@njit(cache=True)
def _flip(state, y, ell, marks, pos):
    _choose(state, y.size, ell, marks, pos)
    for k in range(ell):
        y[pos[k]] ^= 1


@njit(cache=True)
def _power_law_cdf(n, beta):
    m = n // 2
    cdf = np.empty(m)
    total = 0.0
    for k in range(1, m + 1):
        total += k ** (-beta)
        cdf[k - 1] = total
    for k in range(m):
        cdf[k] /= total
    cdf[m - 1] = 1.0
    return cdf


@njit(cache=True)
def _power_law(state, cdf):
    u = _uniform(state)
    return np.searchsorted(cdf, u) + 1


@njit(cache=True)
def _norm_gt0(state, r, var, n):
    if var <= 0.0:
        k = int(math.floor(r + 0.5))
        return min(max(k, 1), n)
    sd = math.sqrt(var)
    if 0.5 - r > 8.0 * sd:
        # acceptance below 1e-15 per draw: treat like the degenerate case
        return 1
    while True:
        k = int(math.floor(r + sd * _normal(state) + 0.5))
        if k >= 1:
            return min(k, n)


@njit(cache=True)
def _crossover_biased(state, x, xs, c, out, marks, pos):
    """``out`` = x with ``Bin>0(n, c)`` random positions copied from ``xs``.

    Returns how many of the copied positions differ between ``x`` and ``xs``.
    """
    n = x.size
    for i in range(n):
        out[i] = x[i]
    ell = _bin_gt0(state, n, c)
    _choose(state, n, ell, marks, pos)
    moved = 0
    for k in range(ell):
        j = pos[k]
        if x[j] != xs[j]:
            out[j] = xs[j]
            moved += 1
    return moved


@njit(cache=True)
def _one_point(state, x1, x2, y1, y2):
    n = x1.size
    cut = _randint(state, n) + 1
    for i in range(cut):
        y1[i] = x1[i]
        y2[i] = x2[i]
    for i in range(cut, n):
        y1[i] = x2[i]
        y2[i] = x1[i]
    return cut


@njit(cache=True)
def _roulette(state, f):
    lo = f[0]
    for v in f:
        if v < lo:
            lo = v
    total = 0.0
    for v in f:
        total += v - lo
    if total <= 0.0:
        return _randint(state, f.size)
    t = _uniform(state) * total
    cum = 0.0
    last = 0
    for i in range(f.size):
        w = f[i] - lo
        if w > 0.0:
            cum += w
            last = i
            if t < cum:
                return i
    return last


@njit(cache=True)
def _two_rate_update(state, r, low_won, n):
    s = 0.75 if low_won else 0.25
    if _uniform(state) <= s:
        return max(r / 2.0, 2.0)
    return min(2.0 * r, n / 4.0)


@njit(cache=True)
def _ollga_update(lam, outcome, F, n):
    # outcome: 1 improved, 0 equal, -1 worse
    if outcome > 0:
        return max(lam / F, 1.0)
    return min(lam * F ** 0.25, float(n))


@njit(cache=True)
def _lognormal_step(state, omega):
    """Perturb the log-odds ``omega = ln((1-p)/p)`` and return ``(omega', p')``."""
    w = omega + 0.22 * _normal(state)
    return w, 1.0 / (1.0 + math.exp(w))


@njit(cache=True)
def _umda_frequencies(pop, selected, s, out):
    n = pop.shape[1]
    lo = 1.0 / n
    hi = 1.0 - 1.0 / n
    for j in range(n):
        ones = 0
        for i in selected:
            ones += pop[i, j]
        p = 2.0 * ones / s
        if p < lo:
            p = lo
        if p > hi:
            p = hi
        out[j] = p


# ------------------------------------------------------------ python API

def _bits(x) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.uint8))
    if arr.ndim != 1:
        raise ValueError("bit string must be one-dimensional")
    return arr


def mutate_strength(x, ell: int, rng: Rng) -> np.ndarray:
    """Flip exactly ``ell`` distinct uniformly chosen positions of a copy of ``x``."""
    y = _bits(x).copy()
    if not 0 <= ell <= y.size:
        raise ValueError(f"mutation strength {ell} outside [0, {y.size}]")
    _flip(rng.state_array, y, ell, np.zeros(y.size, np.uint8), np.empty(y.size, np.int64))
    return y


def sample_bin(n: int, p: float, rng: Rng) -> int:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return int(_bin(rng.state_array, n, p))


def sample_bin_gt0(n: int, p: float, rng: Rng) -> int:
    """Bin(n, p) conditioned on being positive."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability {p} outside (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(_bin_gt0(rng.state_array, n, p))


def power_law_cdf(n: int, beta: float) -> np.ndarray:
    if n < 2:
        raise ValueError("power-law mutation needs n >= 2")
    if beta <= 1.0:
        raise ValueError("beta must exceed 1")
    return _power_law_cdf(n, beta)


def sample_power_law(n: int, beta: float, rng: Rng, cdf: np.ndarray | None = None) -> int:
    """Strength ``k`` in ``[1, n//2]`` with probability proportional to ``k**-beta``."""
    if cdf is None:
        cdf = power_law_cdf(n, beta)
    return int(_power_law(rng.state_array, cdf))


def sample_norm_gt0(r: float, var: float, n: int, rng: Rng) -> int:
    """Rounded normal(r, var) resampled until >= 1, capped at ``n``."""
    if not 0 < r <= n:
        raise ValueError(f"mean {r} outside (0, {n}]")
    if var < 0:
        raise ValueError("variance must be >= 0")
    return int(_norm_gt0(rng.state_array, float(r), float(var), n))


def crossover_biased(x, xs, c: float, rng: Rng) -> np.ndarray:
    a, b = _bits(x), _bits(xs)
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    if not 0.0 < c <= 1.0:
        raise ValueError("crossover bias must lie in (0, 1]")
    out = np.empty_like(a)
    _crossover_biased(rng.state_array, a, b, c, out, np.zeros(a.size, np.uint8), np.empty(a.size, np.int64))
    return out


def one_point_crossover(x1, x2, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    a, b = _bits(x1), _bits(x2)
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    y1, y2 = np.empty_like(a), np.empty_like(b)
    _one_point(rng.state_array, a, b, y1, y2)
    return y1, y2


def roulette_select(fitnesses, rng: Rng) -> int:
    """Fitness-proportionate pick on weights ``f - min(f)``; uniform if all are equal."""
    f = np.ascontiguousarray(fitnesses, dtype=np.float64)
    if f.size == 0:
        raise ValueError("cannot select from an empty population")
    return int(_roulette(rng.state_array, f))


def two_rate_update(r: float, best_from_low_group: bool, n: int, rng: Rng) -> float:
    return float(_two_rate_update(rng.state_array, float(r), bool(best_from_low_group), n))


def ollga_update(lam: float, outcome: str, F: float, n: int) -> float:
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be one of {OUTCOMES}")
    code = {"improved": 1, "equal": 0, "worse": -1}[outcome]
    return float(_ollga_update(float(lam), code, float(F), n))


def lognormal_rate(p: float, rng: Rng) -> float:
    """``1 / (1 + (1-p)/p * exp(0.22 N(0,1)))``, strictly inside (0, 1) for finite draws."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    _, q = _lognormal_step(rng.state_array, math.log((1.0 - p) / p))
    return float(q)


def umda_update_model(selected, s: int, n: int | None = None) -> np.ndarray:
    """Clamped marginal frequencies ``2 * ones / s`` of the selected half."""
    pop = np.ascontiguousarray(np.asarray(selected, dtype=np.uint8))
    if pop.ndim != 2:
        raise ValueError("selected must be a 2D array of bit strings")
    if n is not None and pop.shape[1] != n:
        raise ValueError(f"expected strings of length {n}")
    out = np.empty(pop.shape[1])
    _umda_frequencies(pop, np.arange(pop.shape[0]), s, out)
    return out
