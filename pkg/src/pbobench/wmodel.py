"""W-model layers: dummy-variable reduction, neutrality, epistasis, ruggedness.

Layers are always applied in the order dummy -> neutrality -> epistasis ->
(base function) -> ruggedness. The string layers are compiled kernels that
write into caller-provided buffers; the ruggedness layer is materialised as
a lookup table over the base function's codomain ``[0..s]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from pbobench.rng import Rng, rand_permutation

BASES = ("OneMax", "LeadingOnes")
RUGGEDNESS_KINDS = ("none", "r1", "r2", "r3")


# --------------------------------------------------------------- kernels

@njit(cache=True)
def _onemax(x, length):
    s = 0
    for i in range(length):
        s += x[i]
    return s


@njit(cache=True)
def _leading_ones(x, length):
    for i in range(length):
        if x[i] == 0:
            return i
    return length


@njit(cache=True)
def _select(x, positions, out):
    for k in range(positions.size):
        out[k] = x[positions[k]]
    return positions.size


@njit(cache=True)
def _neutrality(x, length, mu, out):
    m = length // mu
    for i in range(m):
        ones = 0
        for j in range(i * mu, (i + 1) * mu):
            ones += x[j]
        # "at least mu/2 ones", ties resolve to 1
        out[i] = 1 if 2 * ones >= mu else 0
    return m


@njit(cache=True)
def _epistasis_block(x, out, start, m):
    if m == 1:
        out[start] = x[start]
        return
    if m == 2:
        out[start] = x[start + 1]
        out[start + 1] = x[start]
        return
    total = 0
    for j in range(start, start + m):
        total ^= x[j]
    for i in range(m - 1):
        out[start + i] = total ^ x[start + i + 1]
    out[start + m - 1] = total


@njit(cache=True)
def _epistasis(x, length, nu, out):
    full = length // nu
    for b in range(full):
        _epistasis_block(x, out, b * nu, nu)
    rest = length - full * nu
    if rest > 0:
        _epistasis_block(x, out, full * nu, rest)
    return length


# ------------------------------------------------------------ python API

def _as_bits(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit string must be one-dimensional")
    return np.ascontiguousarray(arr)


def reduce_dummy(x, positions: Sequence[int]) -> np.ndarray:
    """Keep only the (0-based, strictly increasing) ``positions`` of ``x``."""
    bits = _as_bits(x)
    pos = np.asarray(positions, dtype=np.int64)
    if pos.size and (pos.min() < 0 or pos.max() >= bits.size):
        raise ValueError(f"dummy position out of range for n={bits.size}")
    if np.any(np.diff(pos) <= 0):
        raise ValueError("dummy positions must be strictly increasing")
    out = np.empty(pos.size, dtype=np.uint8)
    _select(bits, pos, out)
    return out


def apply_neutrality(x, mu: int) -> np.ndarray:
    if mu < 1:
        raise ValueError("mu must be >= 1")
    bits = _as_bits(x)
    out = np.empty(bits.size // mu, dtype=np.uint8)
    _neutrality(bits, bits.size, mu, out)
    return out


def epistasis_block_map(block) -> np.ndarray:
    bits = _as_bits(block)
    if bits.size < 1:
        raise ValueError("epistasis block must be non-empty")
    out = np.empty_like(bits)
    _epistasis_block(bits, out, 0, bits.size)
    return out


def apply_epistasis(x, nu: int) -> np.ndarray:
    if nu < 1:
        raise ValueError("nu must be >= 1")
    bits = _as_bits(x)
    out = np.empty_like(bits)
    _epistasis(bits, bits.size, nu, out)
    return out


def ruggedness_map(kind: str, s: int, v: int) -> int:
    """Value of the ruggedness function ``kind`` with effective dimension ``s`` at ``v``."""
    if not 0 <= v <= s:
        raise ValueError(f"value {v} outside [0..{s}]")
    if kind == "none":
        return v
    if kind == "r1":
        if v == s:
            return math.ceil(s / 2) + 1
        return (v // 2 + 1) if s % 2 == 0 else (math.ceil(v / 2) + 1)
    if kind == "r2":
        if v == s:
            return s
        return v + 1 if (v % 2) == (s % 2) else max(v - 1, 0)
    if kind == "r3":
        if v == s:
            return s
        blocks = s // 5
        # v = s - 5j + k with j in [1..s//5], k in [0..4]
        for j in range(1, blocks + 1):
            k = v - (s - 5 * j)
            if 0 <= k <= 4:
                return s - 5 * j + (4 - k)
        # remainder block [0 .. s - 5*(s//5) - 1], taken verbatim
        return s - (5 * blocks - 1) - v
    raise ValueError(f"unknown ruggedness kind {kind!r}")


def ruggedness_table(kind, s: int) -> np.ndarray:
    """Lookup table ``t[v] = r(v)`` for ``v`` in ``[0..s]``.

    ``kind`` is one of :data:`RUGGEDNESS_KINDS` or an explicit sequence of
    ``s + 1`` integers (e.g. a trap permutation).
    """
    if isinstance(kind, str):
        return np.array([ruggedness_map(kind, s, v) for v in range(s + 1)], dtype=np.int64)
    table = np.asarray(kind, dtype=np.int64)
    if table.shape != (s + 1,):
        raise ValueError(f"explicit ruggedness table must have {s + 1} entries, got {table.size}")
    return table


@dataclass(frozen=True)
class WModelLayers:
    """One W-model configuration ``({i_1..i_m}, mu, nu, r)`` over a base problem.

    ``dummy_positions`` are 0-based; ``None`` keeps all ``n`` variables.
    ``ruggedness`` is a kind name or an explicit table over ``[0..s]``.
    """

    base: str = "OneMax"
    dummy_positions: tuple[int, ...] | None = None
    mu: int = 1
    nu: int = 1
    ruggedness: str | tuple[int, ...] = "none"
    _tables: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"base must be one of {BASES}, got {self.base!r}")
        if self.mu < 1 or self.nu < 1:
            raise ValueError("mu and nu must be >= 1")
        if isinstance(self.ruggedness, str):
            if self.ruggedness not in RUGGEDNESS_KINDS:
                raise ValueError(f"unknown ruggedness kind {self.ruggedness!r}")
        else:
            object.__setattr__(self, "ruggedness", tuple(int(v) for v in self.ruggedness))
        if self.dummy_positions is not None:
            pos = tuple(int(p) for p in self.dummy_positions)
            if any(b <= a for a, b in zip(pos, pos[1:])) or (pos and pos[0] < 0):
                raise ValueError("dummy positions must be strictly increasing and >= 0")
            object.__setattr__(self, "dummy_positions", pos)

    def reduced_length(self, n: int) -> int:
        return n if self.dummy_positions is None else len(self.dummy_positions)

    def effective_dim(self, n: int) -> int:
        return self.reduced_length(n) // self.mu

    def table(self, n: int) -> np.ndarray:
        s = self.effective_dim(n)
        if s not in self._tables:
            self._tables[s] = ruggedness_table(self.ruggedness, s)
        return self._tables[s]

    def optimum(self, n: int) -> int:
        # the base attains every value in [0..s]; epistasis is a bijection
        return int(self.table(n).max())

    def reduce(self, x) -> np.ndarray:
        """String the base function sees: dummy -> neutrality -> epistasis."""
        y = _as_bits(x)
        if self.dummy_positions is not None:
            y = reduce_dummy(y, self.dummy_positions)
        if self.mu > 1:
            y = apply_neutrality(y, self.mu)
        if self.nu > 1:
            y = apply_epistasis(y, self.nu)
        return y

    def value(self, x) -> int:
        bits = _as_bits(x)
        y = self.reduce(bits)
        base = _onemax(y, y.size) if self.base == "OneMax" else _leading_ones(y, y.size)
        return int(self.table(bits.size)[base])

    def to_json(self) -> dict:
        rug = self.ruggedness if isinstance(self.ruggedness, str) else list(self.ruggedness)
        return {
            "base": self.base,
            "dummy_positions": None if self.dummy_positions is None else list(self.dummy_positions),
            "mu": self.mu,
            "nu": self.nu,
            "ruggedness": rug,
        }

    @classmethod
    def from_json(cls, data: dict) -> "WModelLayers":
        rug = data.get("ruggedness", "none")
        return cls(
            base=data["base"],
            dummy_positions=None if data.get("dummy_positions") is None else tuple(data["dummy_positions"]),
            mu=int(data.get("mu", 1)),
            nu=int(data.get("nu", 1)),
            ruggedness=rug if isinstance(rug, str) else tuple(rug),
        )


_CATALOG = {
    # fid offset within a base block: (dummy fraction, mu, nu, ruggedness)
    0: ("half", 1, 1, "none"),
    1: ("ninety", 1, 1, "none"),
    2: (None, 3, 1, "none"),
    3: (None, 1, 4, "none"),
    4: (None, 1, 1, "r1"),
    5: (None, 1, 1, "r2"),
    6: (None, 1, 1, "r3"),
}


def wmodel_catalog(fid: int, n: int, rng: Rng) -> WModelLayers:
    """Single-layer W-model configuration of benchmark function ``fid`` (4..17).

    Dummy positions (F4, F5, F11, F12) are drawn from ``rng`` once; the caller
    freezes them into the problem instance.
    """
    if not 4 <= fid <= 17:
        raise ValueError(f"W-model functions are F4..F17, got F{fid}")
    base = "OneMax" if fid <= 10 else "LeadingOnes"
    frac, mu, nu, rug = _CATALOG[(fid - 4) % 7]
    dummy = None
    if frac is not None:
        m = n // 2 if frac == "half" else (9 * n) // 10
        dummy = tuple(sorted(int(p) for p in rand_permutation(rng, n)[:m]))
    return WModelLayers(base=base, dummy_positions=dummy, mu=mu, nu=nu, ruggedness=rug)
