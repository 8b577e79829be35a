"""The twelve reference heuristics behind one run interface."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from pbobench.algorithms import heuristics as _h
from pbobench.algorithms.operators import (
    crossover_biased,
    lognormal_rate,
    mutate_strength,
    ollga_update,
    one_point_crossover,
    power_law_cdf,
    roulette_select,
    sample_bin,
    sample_bin_gt0,
    sample_norm_gt0,
    sample_power_law,
    two_rate_update,
    umda_update_model,
)
from pbobench.algorithms.tracker import LOG_MODES, LOG_NONE, log_rows, new_context
from pbobench.problems.instances import ProblemInstance
from pbobench.records import LogEvent, RunRecord
from pbobench.rng import Rng

# canonical name -> (file-system slug, default parameters, parameter channels)
_REGISTRY = {
    "gHC": ("ghc", {}, ()),
    "RLS": ("rls", {}, ()),
    "(1+1)EA": ("ea_1p1", {"lam": 1, "p": None}, ()),
    "fGA": ("fga", {"lam": 1, "beta": 1.5}, ()),
    "(1+10)EA": ("ea_1p10", {"lam": 10, "p": None}, ()),
    "(1+10)EA_r/2,2r": ("ea_two_rate", {"lam": 10, "r_init": 2.0}, ("rate_r",)),
    "(1+10)EA_norm": ("ea_norm", {"lam": 10, "r_init": 2.0}, ("rate_r", "counter_c")),
    "(1+10)EA_var": ("ea_var", {"lam": 10, "r_init": 2.0, "F": 0.98}, ("rate_r", "counter_c")),
    "(1+10)EA_logn": ("ea_lognormal", {"lam": 10, "p_init": 0.2}, ("p",)),
    "(1+(λ,λ))GA": ("ollga", {"F": 1.5}, ("lambda",)),
    "vGA": ("vga", {"mu": 30, "pc": 0.37, "pm": None}, ()),
    "UMDA": ("umda", {"s": 50}, ()),
}

ALGORITHM_NAMES = tuple(_REGISTRY)
ALGORITHM_SLUGS = {name: slug for name, (slug, _, _) in _REGISTRY.items()}

_EXTRA_ALIASES = {
    "(1+(lambda,lambda))GA": "(1+(λ,λ))GA",
    "ollga": "(1+(λ,λ))GA",
    "(1+10)EA_two_rate": "(1+10)EA_r/2,2r",
    "two_rate": "(1+10)EA_r/2,2r",
    "(1+10)EA_lognormal": "(1+10)EA_logn",
    "lognormal": "(1+10)EA_logn",
}


def _key(name: str) -> str:
    return re.sub(r"[\s_\-]", "", name).lower()


_LOOKUP = {}
for _name, (_slug, _, _) in _REGISTRY.items():
    _LOOKUP[_key(_name)] = _name
    _LOOKUP[_key(_slug)] = _name
for _alias, _name in _EXTRA_ALIASES.items():
    _LOOKUP[_key(_alias)] = _name


def canonical_name(name: str) -> str:
    """Resolve a canonical name, slug or ASCII alias; unknown names raise ``ValueError``."""
    try:
        return _LOOKUP[_key(str(name))]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {name!r}; valid names: {', '.join(ALGORITHM_NAMES)}"
        ) from None


def algorithm_slug(name: str) -> str:
    return ALGORITHM_SLUGS[canonical_name(name)]


def parameter_channels(name: str) -> tuple[str, ...]:
    return _REGISTRY[canonical_name(name)][2]


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        name = canonical_name(self.name)
        object.__setattr__(self, "name", name)
        unknown = set(self.params) - set(_REGISTRY[name][1])
        if unknown:
            raise ValueError(f"{name} has no parameter(s) {sorted(unknown)}")


class Algorithm:
    """A heuristic bound to a dimension, with defaults resolved and checked."""

    def __init__(self, spec: AlgorithmSpec, n: int):
        self.spec = spec
        self.name = spec.name
        self.n = n
        self.slug = ALGORITHM_SLUGS[self.name]
        self.channels = _REGISTRY[self.name][2]
        params = dict(_REGISTRY[self.name][1])
        params.update(spec.params)
        if "p" in params and params["p"] is None:
            params["p"] = 1.0 / n
        if "pm" in params and params["pm"] is None:
            params["pm"] = min(2.0 / n, 1.0)
        self.params = params
        self._validate()
        self._cdf = power_law_cdf(n, params["beta"]) if self.name == "fGA" else None

    def _validate(self):
        p, n = self.params, self.n
        if n < 1:
            raise ValueError("dimension must be positive")
        if "lam" in p and int(p["lam"]) < 1:
            raise ValueError("lam must be >= 1")
        if self.name == "fGA" and n < 2:
            raise ValueError("fGA needs n >= 2")
        if "p" in p and not 0.0 < p["p"] < 1.0:
            raise ValueError("mutation rate must lie in (0, 1)")
        if self.name == "(1+10)EA_r/2,2r":
            if not 2.0 <= p["r_init"] <= n / 4:
                raise ValueError(f"two-rate EA needs 2 <= r_init <= n/4 (n >= 8), got n={n}")
        if "r_init" in p and not 0 < p["r_init"] <= n:
            raise ValueError("r_init must lie in (0, n]")
        if "p_init" in p and not 0.0 < p["p_init"] < 1.0:
            raise ValueError("p_init must lie in (0, 1)")
        if self.name == "vGA" and (int(p["mu"]) < 2 or int(p["mu"]) % 2):
            raise ValueError("vGA population size must be even and >= 2")
        if self.name == "UMDA" and (int(p["s"]) < 2 or int(p["s"]) % 2):
            raise ValueError("UMDA population size must be even and >= 2")

    def _dispatch(self, inst, ctx, state):
        p, k = self.params, inst
        name = self.name
        if name == "gHC":
            _h._run_ghc(k, ctx, state)
        elif name == "RLS":
            _h._run_rls(k, ctx, state)
        elif name in ("(1+1)EA", "(1+10)EA"):
            _h._run_ea(k, ctx, state, int(p["lam"]), float(p["p"]))
        elif name == "fGA":
            _h._run_fga(k, ctx, state, int(p["lam"]), self._cdf)
        elif name == "(1+10)EA_r/2,2r":
            _h._run_two_rate(k, ctx, state, int(p["lam"]), float(p["r_init"]))
        elif name == "(1+10)EA_norm":
            _h._run_norm(k, ctx, state, int(p["lam"]), float(p["r_init"]), 1.0, False)
        elif name == "(1+10)EA_var":
            _h._run_norm(k, ctx, state, int(p["lam"]), float(p["r_init"]), float(p["F"]), True)
        elif name == "(1+10)EA_logn":
            _h._run_lognormal(k, ctx, state, int(p["lam"]), float(p["p_init"]))
        elif name == "(1+(λ,λ))GA":
            _h._run_ollga(k, ctx, state, float(p["F"]))
        elif name == "vGA":
            _h._run_vga(k, ctx, state, int(p["mu"]), float(p["pc"]), float(p["pm"]))
        elif name == "UMDA":
            _h._run_umda(k, ctx, state, int(p["s"]))
        else:  # pragma: no cover
            raise AssertionError(name)

    def run(self, instance: ProblemInstance, budget: int, rng: Rng, logger=None):
        """Execute one run; returns ``(RunRecord, log rows)``.

        ``logger`` (optional) receives every logged event through
        ``record_evaluation``; its ``mode`` picks delta or full logging.
        """
        if instance.dim != self.n:
            raise ValueError(f"algorithm built for n={self.n}, instance has n={instance.dim}")
        if budget < 1:
            raise ValueError("budget must be >= 1")
        seed = rng.state
        mode = LOG_NONE if logger is None else LOG_MODES[logger.mode]
        ctx = new_context(self.n, int(budget), instance.optimum_raw, mode, len(self.channels))
        self._dispatch(instance.kernel, ctx, rng.state_array)
        rows = log_rows(ctx)
        if logger is not None:
            nch = len(self.channels)
            for row in rows:
                logger.record_evaluation(
                    LogEvent(int(row[0]), row[1], row[2], row[3], row[4], tuple(row[5 : 5 + nch]))
                )
        evals, hit_time = int(ctx.ints[0]), int(ctx.ints[3])
        rec = RunRecord(
            alg=self.name,
            fid=instance.fid,
            dim=instance.dim,
            iid=instance.iid,
            seed=seed,
            budget=int(budget),
            evals_used=evals,
            final_best_raw=float(ctx.reals[0]),
            final_best_transformed=float(ctx.reals[1]),
            hit=hit_time >= 0,
            hitting_time=hit_time if hit_time >= 0 else None,
        )
        return rec, rows

    def __repr__(self) -> str:
        return f"Algorithm({self.name!r}, n={self.n}, params={self.params})"


def make_algorithm(spec, n: int) -> Algorithm:
    """Bind ``spec`` (an :class:`AlgorithmSpec` or a name) to dimension ``n``."""
    if not isinstance(spec, AlgorithmSpec):
        spec = AlgorithmSpec(spec)
    return Algorithm(spec, n)


def execute_run(algorithm: Algorithm, instance: ProblemInstance, budget: int, rng: Rng, logger=None) -> RunRecord:
    return algorithm.run(instance, budget, rng, logger)[0]


__all__ = [
    "ALGORITHM_NAMES",
    "ALGORITHM_SLUGS",
    "Algorithm",
    "AlgorithmSpec",
    "algorithm_slug",
    "canonical_name",
    "crossover_biased",
    "execute_run",
    "lognormal_rate",
    "make_algorithm",
    "mutate_strength",
    "ollga_update",
    "one_point_crossover",
    "parameter_channels",
    "roulette_select",
    "sample_bin",
    "sample_bin_gt0",
    "sample_norm_gt0",
    "sample_power_law",
    "two_rate_update",
    "umda_update_model",
]
