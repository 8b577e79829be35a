"""Problem instances: a base function or W-model function plus frozen z/sigma/a/b.

An instance maps ``x`` to ``a * f(W(sigma(x XOR z))) + b`` where ``W`` is the
(possibly empty) W-model stack and ``f`` the base function. Everything is
fixed at build time, so evaluation is pure.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from pbobench.problems.functions import (
    FUNCTION_NAMES,
    _base_value,
    base_optimum,
    check_dimension,
    check_fid,
    graph_for,
    mivs_dimension,
)
from pbobench.rng import Rng, rand_bitstring, rand_permutation
from pbobench.wmodel import (
    WModelLayers,
    _epistasis,
    _leading_ones,
    _neutrality,
    _onemax,
    _select,
    wmodel_catalog,
)

VALID_IIDS = (1, 2, 3, 4, 5, 6, 51, 52, 53, 54, 55)
XOR_IIDS = (2, 3, 4, 5, 6)
PERMUTATION_IIDS = (51, 52, 53, 54, 55)

EvaluationResult = namedtuple("EvaluationResult", ["raw", "transformed"])

# flat, jit-friendly view of an instance; see ProblemInstance.kernel
InstanceKernel = namedtuple(
    "InstanceKernel",
    [
        "fid", "n", "length",
        "use_z", "z", "use_sigma", "sigma",
        "wmodel", "wbase", "use_dummy", "dummy", "mu", "nu", "table",
        "edges", "a", "b",
    ],
)


def instance_seed(fid: int, dim: int, iid: int, master_seed: int) -> int:
    """Seed of the stream that draws an instance's transformation parameters."""
    return ((fid * 1009 + iid) * 9973 + dim + master_seed) % (2**31 - 2) + 1


@dataclass(frozen=True, eq=False)
class InstanceParams:
    iid: int
    z: np.ndarray
    sigma: np.ndarray
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.iid not in VALID_IIDS:
            raise ValueError(f"invalid instance id {self.iid} (valid: {VALID_IIDS})")
        if not self.a > 0:
            raise ValueError("multiplicative scale a must be positive")
        z = np.ascontiguousarray(self.z, dtype=np.uint8)
        sigma = np.ascontiguousarray(self.sigma, dtype=np.int64)
        if z.shape != sigma.shape:
            raise ValueError("z and sigma must have the same length")
        if not np.array_equal(np.sort(sigma), np.arange(sigma.size)):
            raise ValueError("sigma must be a permutation of 0..n-1")
        z.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return int(self.z.size)

    def is_identity(self) -> bool:
        return self.a == 1.0 and self.b == 0.0 and not self.z.any() and bool(
            np.all(self.sigma == np.arange(self.n))
        )

    def __eq__(self, other):
        if not isinstance(other, InstanceParams):
            return NotImplemented
        return (
            self.iid == other.iid
            and self.a == other.a
            and self.b == other.b
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.sigma, other.sigma)
        )


def identity_params(n: int, iid: int = 1) -> InstanceParams:
    return InstanceParams(iid, np.zeros(n, np.uint8), np.arange(n, dtype=np.int64))


def derive_instance_params(fid: int, dim: int, iid: int, master_seed: int = 0) -> InstanceParams:
    """Deterministic z/sigma/a/b for instance ``iid`` of ``(fid, dim)``."""
    check_fid(fid)
    if iid not in VALID_IIDS:
        raise ValueError(f"invalid instance id {iid} (valid: {VALID_IIDS})")
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if iid == 1:
        return identity_params(dim)
    rng = Rng(instance_seed(fid, dim, iid, master_seed))
    z = np.zeros(dim, np.uint8)
    sigma = np.arange(dim, dtype=np.int64)
    if iid in XOR_IIDS:
        z = rand_bitstring(rng, dim)
    else:
        sigma = rand_permutation(rng, dim)
    a = 0.2 + 4.8 * rng.uniform()
    b = -1000.0 + 2000.0 * rng.uniform()
    return InstanceParams(iid, z, sigma, a, b)


def problem_layers(fid: int, dim: int, master_seed: int = 0) -> WModelLayers | None:
    """W-model layers of F4-F17, shared by all instances of ``(fid, dim)``."""
    if not 4 <= fid <= 17:
        return None
    # iid 0 is never a real instance, so this stream is disjoint from theirs
    return wmodel_catalog(fid, dim, Rng(instance_seed(fid, dim, 0, master_seed)))


@njit(cache=True)
def _raw_value(inst, x, scratch):
    """Untransformed value of ``x`` under ``inst``; ``scratch`` is a ``(2, n)`` uint8 buffer."""
    cur = x
    slot = 0
    if inst.use_z or inst.use_sigma:
        out = scratch[slot]
        for i in range(inst.n):
            j = inst.sigma[i]
            out[i] = x[j] ^ inst.z[j]
        cur = out
        slot = 1
    length = inst.n
    if inst.wmodel:
        if inst.use_dummy:
            out = scratch[slot]
            length = _select(cur, inst.dummy, out)
            cur = out
            slot = 1 - slot
        if inst.mu > 1:
            out = scratch[slot]
            length = _neutrality(cur, length, inst.mu, out)
            cur = out
            slot = 1 - slot
        if inst.nu > 1:
            out = scratch[slot]
            _epistasis(cur, length, inst.nu, out)
            cur = out
            slot = 1 - slot
        if inst.wbase == 0:
            v = _onemax(cur, length)
        else:
            v = _leading_ones(cur, length)
        return float(inst.table[v])
    return _base_value(inst.fid, cur, inst.length, inst.edges)


class ProblemInstance:
    """Frozen benchmark instance; evaluation is pure and reentrant.

    >>> inst = ProblemInstance.build(1, 16, 1)
    >>> inst.evaluate(np.ones(16, np.uint8))
    EvaluationResult(raw=16.0, transformed=16.0)
    """

    def __init__(
        self,
        fid: int,
        dim: int,
        params: InstanceParams,
        wlayers: WModelLayers | None = None,
        master_seed: int = 0,
    ):
        fid = check_fid(fid)
        check_dimension(fid, dim)
        if params.n != dim:
            raise ValueError(f"instance parameters have length {params.n}, expected {dim}")
        if 4 <= fid <= 17 and wlayers is None:
            raise ValueError(f"F{fid} needs W-model layers")
        if wlayers is not None and not 4 <= fid <= 17:
            raise ValueError(f"F{fid} is not a W-model function")
        if wlayers is not None:
            if wlayers.dummy_positions and wlayers.dummy_positions[-1] >= dim:
                raise ValueError("dummy position out of range")
            if wlayers.effective_dim(dim) < 1:
                raise ValueError(f"F{fid}: W-model layers leave no effective variables at n={dim}")
        self.fid = fid
        self.dim = dim
        self.params = params
        self.wlayers = wlayers
        self.master_seed = master_seed
        self.graph = graph_for(fid, dim)
        self.graph.flags.writeable = False
        self.optimum_raw = self._optimum()
        self._kernel = self._make_kernel()

    @classmethod
    def build(cls, fid: int, dim: int, iid: int = 1, master_seed: int = 0) -> "ProblemInstance":
        check_dimension(fid, dim)
        return cls(
            fid,
            dim,
            derive_instance_params(fid, dim, iid, master_seed),
            problem_layers(fid, dim, master_seed),
            master_seed,
        )

    @property
    def iid(self) -> int:
        return self.params.iid

    @property
    def n(self) -> int:
        return self.dim

    @property
    def name(self) -> str:
        return FUNCTION_NAMES[self.fid]

    @property
    def a(self) -> float:
        return self.params.a

    @property
    def b(self) -> float:
        return self.params.b

    def _optimum(self):
        if self.wlayers is not None:
            # the string layers are surjective onto {0,1}^s, so the table max is attained
            return float(self.wlayers.optimum(self.dim))
        return base_optimum(self.fid, self.dim)

    def _make_kernel(self) -> InstanceKernel:
        p = self.params
        w = self.wlayers
        if w is not None:
            table = np.ascontiguousarray(w.table(self.dim), dtype=np.int64)
            dummy = np.asarray(w.dummy_positions or (), dtype=np.int64)
        else:
            table = np.zeros(1, np.int64)
            dummy = np.zeros(0, np.int64)
        return InstanceKernel(
            fid=self.fid,
            n=self.dim,
            length=mivs_dimension(self.dim) if self.fid == 22 else self.dim,
            use_z=bool(p.z.any()),
            z=p.z,
            use_sigma=not bool(np.all(p.sigma == np.arange(self.dim))),
            sigma=p.sigma,
            wmodel=w is not None,
            wbase=0 if w is None or w.base == "OneMax" else 1,
            use_dummy=w is not None and w.dummy_positions is not None,
            dummy=dummy,
            mu=1 if w is None else w.mu,
            nu=1 if w is None else w.nu,
            table=table,
            edges=np.ascontiguousarray(self.graph, dtype=np.int64),
            a=float(p.a),
            b=float(p.b),
        )

    @property
    def kernel(self) -> InstanceKernel:
        """Flat tuple consumed by the compiled algorithm loops."""
        return self._kernel

    def transform(self, x) -> np.ndarray:
        """``sigma(x XOR z)``: the string the W-model / base function receives."""
        bits = self._check(x)
        return (bits ^ self.params.z)[self.params.sigma]

    def _check(self, x) -> np.ndarray:
        bits = np.ascontiguousarray(np.asarray(x, dtype=np.uint8))
        if bits.shape != (self.dim,):
            raise ValueError(f"expected a bit string of length {self.dim}, got shape {bits.shape}")
        return bits

    def evaluate(self, x) -> EvaluationResult:
        bits = self._check(x)
        scratch = np.empty((2, self.dim), np.uint8)
        raw = float(_raw_value(self._kernel, bits, scratch))
        return EvaluationResult(raw, self.params.a * raw + self.params.b)

    __call__ = evaluate

    def to_json(self) -> dict:
        p = self.params
        return {
            "fid": self.fid,
            "dim": self.dim,
            "iid": p.iid,
            "z": "".join(map(str, p.z.tolist())),
            "sigma": p.sigma.tolist(),
            "a": p.a,
            "b": p.b,
            "wlayers": None if self.wlayers is None else self.wlayers.to_json(),
            "optimum_raw": self.optimum_raw,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProblemInstance":
        params = InstanceParams(
            int(data["iid"]),
            np.array([int(c) for c in data["z"]], dtype=np.uint8),
            np.array(data["sigma"], dtype=np.int64),
            float(data["a"]),
            float(data["b"]),
        )
        w = data.get("wlayers")
        return cls(int(data["fid"]), int(data["dim"]), params, None if w is None else WModelLayers.from_json(w))

    def with_params(self, **changes) -> "ProblemInstance":
        return ProblemInstance(self.fid, self.dim, replace(self.params, **changes), self.wlayers, self.master_seed)

    def __repr__(self) -> str:
        return f"ProblemInstance(F{self.fid} {self.name}, n={self.dim}, iid={self.iid})"


def evaluate_instance(inst: ProblemInstance, x) -> EvaluationResult:
    return inst.evaluate(x)
