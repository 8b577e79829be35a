"""Base objective functions F1-F3, F18-F23 and their graph constructions.

Bit strings are 0-based ``uint8`` arrays; ``x[0]`` is the first variable.
Graphs are ``(E, 2)`` arrays of 0-based vertex pairs, each undirected edge
listed once.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from pbobench.wmodel import _leading_ones, _onemax

FUNCTION_NAMES = {
    1: "OneMax",
    2: "LeadingOnes",
    3: "Harmonic",
    4: "OneMax_Dummy1",
    5: "OneMax_Dummy2",
    6: "OneMax_Neutrality",
    7: "OneMax_Epistasis",
    8: "OneMax_Ruggedness1",
    9: "OneMax_Ruggedness2",
    10: "OneMax_Ruggedness3",
    11: "LeadingOnes_Dummy1",
    12: "LeadingOnes_Dummy2",
    13: "LeadingOnes_Neutrality",
    14: "LeadingOnes_Epistasis",
    15: "LeadingOnes_Ruggedness1",
    16: "LeadingOnes_Ruggedness2",
    17: "LeadingOnes_Ruggedness3",
    18: "LABS",
    19: "Ising_Ring",
    20: "Ising_Torus",
    21: "Ising_Triangular",
    22: "MIVS",
    23: "NQueens",
}

ISING_KINDS = {19: "ring", 20: "torus", 21: "triangular"}


def check_fid(fid: int) -> int:
    if not isinstance(fid, (int, np.integer)) or not 1 <= fid <= 23:
        raise ValueError(f"unknown function id {fid!r} (valid: 1..23)")
    return int(fid)


def _square_side(n: int) -> int | None:
    side = math.isqrt(n)
    return side if side * side == n else None


def mivs_dimension(n: int) -> int:
    """Graph dimension used for MIVS: odd ``n`` drops its last variable."""
    return n if n % 2 == 0 else n - 1


def check_dimension(fid: int, n: int) -> None:
    """Raise ``ValueError`` naming the violated constraint if F``fid`` is undefined at ``n``."""
    fid = check_fid(fid)
    if n < 1:
        raise ValueError(f"F{fid}: dimension must be positive, got {n}")
    if fid == 18 and n < 2:
        raise ValueError("F18 (LABS) requires n >= 2")
    if fid == 19 and n < 3:
        raise ValueError("F19 (Ising ring) requires n >= 3")
    if fid in (20, 21):
        side = _square_side(n)
        if side is None or side < 2:
            raise ValueError(f"F{fid} requires n = N*N with N >= 2, got n={n}")
    if fid == 22 and mivs_dimension(n) < 4:
        raise ValueError("F22 (MIVS) requires n >= 4")
    if fid == 23 and _square_side(n) is None:
        raise ValueError(f"F23 (N-Queens) requires a perfect-square n, got n={n}")


# ----------------------------------------------------------------- graphs

def build_ising_graph(kind: str, n: int) -> np.ndarray:
    """Periodic lattice underlying the Ising problems.

    ``ring`` has ``n`` edges, ``torus`` ``2n`` (degree 4) and ``triangular``
    ``3n`` (degree 6). Vertex ``(i, j)`` of the 2D lattices is ``i * N + j``.
    For ``N = 2`` neighbours coincide and the multigraph keeps both copies.
    """
    if kind == "ring":
        if n < 3:
            raise ValueError("ring lattice requires n >= 3")
        return np.array([(i, (i + 1) % n) for i in range(n)], dtype=np.int64)
    if kind not in ("torus", "triangular"):
        raise ValueError(f"unknown Ising lattice {kind!r}")
    side = _square_side(n)
    if side is None or side < 2:
        raise ValueError(f"{kind} lattice requires n = N*N with N >= 2, got n={n}")
    offsets = [(1, 0), (0, 1)]
    if kind == "triangular":
        offsets.append((1, 1))
    edges = []
    for i in range(side):
        for j in range(side):
            for di, dj in offsets:
                k, l = (i + di) % side, (j + dj) % side
                edges.append((i * side + j, k * side + l))
    return np.array(edges, dtype=np.int64)


def build_mivs_graph(n: int) -> np.ndarray:
    """Two ``n/2``-vertex paths joined by ``i ~ i+n/2+1`` and ``i ~ i+n/2-1`` edges."""
    if n < 4 or n % 2:
        raise ValueError(f"MIVS graph requires an even n >= 4, got {n}")
    h = n // 2
    edges = []
    for i in range(1, n):
        if i != h:
            edges.append((i, i + 1))
    for i in range(1, h):
        edges.append((i, i + h + 1))
    for i in range(2, h + 1):
        edges.append((i, i + h - 1))
    return np.array(sorted(edges), dtype=np.int64) - 1


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _harmonic(x, length):
    s = 0
    for i in range(length):
        if x[i]:
            s += i + 1
    return s


@njit(cache=True)
def _labs(x, length):
    energy = 0
    for k in range(1, length):
        c = 0
        for i in range(length - k):
            # (2x_i - 1)(2x_{i+k} - 1) is +1 on agreement, -1 otherwise
            c += 1 if x[i] == x[i + k] else -1
        energy += c * c
    if energy == 0:
        # unreachable for length >= 2: the lag-(n-1) term is always 1
        raise ValueError("LABS energy is zero")
    return length * length / (2.0 * energy)


@njit(cache=True)
def _ising(x, edges):
    s = 0
    for e in range(edges.shape[0]):
        u = x[edges[e, 0]]
        v = x[edges[e, 1]]
        if u == v:
            s += 1 if u else -1
    # both orientations of every undirected edge contribute
    return 2 * s


@njit(cache=True)
def _mivs(x, length, edges):
    ones = 0
    for i in range(length):
        ones += x[i]
    conflicts = 0
    for e in range(edges.shape[0]):
        conflicts += x[edges[e, 0]] & x[edges[e, 1]]
    return ones - length * conflicts


@njit(cache=True)
def _nqueens(x, side):
    queens = 0
    penalty = 0
    for i in range(side):
        row = 0
        col = 0
        for j in range(side):
            row += x[i * side + j]
            col += x[j * side + i]
        queens += row
        if row > 1:
            penalty += row - 1
        if col > 1:
            penalty += col - 1
    for k in range(-(side - 1), side):
        diag = 0
        for i in range(side):
            j = i + k
            if 0 <= j < side:
                diag += x[i * side + j]
        if diag > 1:
            penalty += diag - 1
    for l in range(0, 2 * side - 1):
        anti = 0
        for i in range(side):
            j = l - i
            if 0 <= j < side:
                anti += x[i * side + j]
        if anti > 1:
            penalty += anti - 1
    return queens - side * penalty


@njit(cache=True)
def _base_value(fid, y, length, edges):
    """Value of base function ``fid`` on the first ``length`` entries of ``y``."""
    if fid == 1:
        return float(_onemax(y, length))
    if fid == 2:
        return float(_leading_ones(y, length))
    if fid == 3:
        return float(_harmonic(y, length))
    if fid == 18:
        return _labs(y, length)
    if fid == 19 or fid == 20 or fid == 21:
        return float(_ising(y, edges))
    if fid == 22:
        return float(_mivs(y, length, edges))
    if fid == 23:
        return float(_nqueens(y, int(np.sqrt(length) + 0.5)))
    raise ValueError("not a base function id")


def graph_for(fid: int, n: int) -> np.ndarray:
    """Frozen graph for the graph-based problems, empty ``(0, 2)`` otherwise."""
    if fid in ISING_KINDS:
        return build_ising_graph(ISING_KINDS[fid], n)
    if fid == 22:
        return build_mivs_graph(mivs_dimension(n))
    return np.zeros((0, 2), dtype=np.int64)


def evaluate_base(fid: int, x, graph: np.ndarray | None = None) -> float:
    """Untransformed value of base function F1-F3 or F18-F23 at ``x``."""
    fid = check_fid(fid)
    if 4 <= fid <= 17:
        raise ValueError(f"F{fid} is a W-model function; evaluate it through a ProblemInstance")
    bits = np.ascontiguousarray(np.asarray(x, dtype=np.uint8))
    n = bits.size
    check_dimension(fid, n)
    if graph is None:
        graph = graph_for(fid, n)
    length = mivs_dimension(n) if fid == 22 else n
    return float(_base_value(fid, bits, length, np.ascontiguousarray(graph, dtype=np.int64)))


def base_optimum(fid: int, n: int) -> float | None:
    """Analytic maximum of base function ``fid`` at dimension ``n`` (``None`` if unknown)."""
    if fid in (1, 2):
        return float(n)
    if fid == 3:
        return n * (n + 1) / 2
    if fid == 18:
        return None
    if fid in ISING_KINDS:
        return float(2 * len(graph_for(fid, n)))
    if fid == 22:
        # the graph is a path of n/2 two-vertex columns with complete joins,
        # so the best independent set takes both vertices of alternate columns
        half = mivs_dimension(n) // 2
        return float(2 * math.ceil(half / 2))
    if fid == 23:
        side = math.isqrt(n)
        return float({1: 1, 2: 1, 3: 2}.get(side, side))
    raise ValueError(f"F{fid} has no base optimum")
