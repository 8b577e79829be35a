"""Budget accounting, best-so-far tracking and in-kernel logging for one run."""

from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit, types
from numba.typed import List

from pbobench.problems.instances import _raw_value

LOG_NONE, LOG_DELTA, LOG_FULL = 0, 1, 2
LOG_MODES = {"none": LOG_NONE, "delta": LOG_DELTA, "full": LOG_FULL}

# ints:  evals, budget, log mode, hitting time (-1 = not hit), last logged eval, #channels
# reals: best raw, best transformed, optimum (nan = unknown), last raw, last transformed,
#        channel values at the last evaluation (2 slots)
Context = namedtuple("Context", ["ints", "reals", "params", "log", "scratch"])

_I_EVALS, _I_BUDGET, _I_MODE, _I_HIT, _I_LOGGED, _I_NCH = range(6)


def new_context(n: int, budget: int, optimum: float | None, mode: int, channels: int) -> Context:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    ints = np.array([0, budget, mode, -1, 0, channels], dtype=np.int64)
    reals = np.full(7, np.nan)
    reals[2] = np.nan if optimum is None else float(optimum)
    log = List.empty_list(types.float64)
    return Context(ints, reals, np.zeros(2), log, np.empty((2, n), np.uint8))


@njit(cache=True)
def _append(ctx, e, raw, t, p0, p1):
    log = ctx.log
    log.append(float(e))
    log.append(raw)
    log.append(ctx.reals[0])
    log.append(t)
    log.append(ctx.reals[1])
    nch = ctx.ints[_I_NCH]
    if nch > 0:
        log.append(p0)
    if nch > 1:
        log.append(p1)
    ctx.ints[_I_LOGGED] = e


@njit(cache=True)
def _evaluate(inst, ctx, x):
    """Evaluate ``x``, charge one budget unit and return the transformed value."""
    ints = ctx.ints
    reals = ctx.reals
    ints[_I_EVALS] += 1
    e = ints[_I_EVALS]
    raw = _raw_value(inst, x, ctx.scratch)
    t = inst.a * raw + inst.b
    improved = e == 1 or raw > reals[0]
    if improved:
        reals[0] = raw
        reals[1] = t
    p0 = ctx.params[0]
    p1 = ctx.params[1]
    reals[3] = raw
    reals[4] = t
    reals[5] = p0
    reals[6] = p1
    mode = ints[_I_MODE]
    if mode == LOG_FULL or (mode == LOG_DELTA and improved):
        _append(ctx, e, raw, t, p0, p1)
    # nan optimum never compares true
    if ints[_I_HIT] < 0 and raw >= reals[2]:
        ints[_I_HIT] = e
    return t


@njit(cache=True)
def _done(ctx):
    return ctx.ints[_I_EVALS] >= ctx.ints[_I_BUDGET] or ctx.ints[_I_HIT] >= 0


@njit(cache=True)
def _finish(ctx):
    """Append the last evaluation in delta mode if it was not already logged."""
    ints = ctx.ints
    if ints[_I_MODE] == LOG_DELTA and ints[_I_EVALS] > 0 and ints[_I_LOGGED] != ints[_I_EVALS]:
        r = ctx.reals
        _append(ctx, ints[_I_EVALS], r[3], r[4], r[5], r[6])


@njit(cache=True)
def _log_to_array(log):
    out = np.empty(len(log))
    for i in range(len(log)):
        out[i] = log[i]
    return out


def log_rows(ctx: Context) -> np.ndarray:
    width = 5 + int(ctx.ints[_I_NCH])
    return _log_to_array(ctx.log).reshape(-1, width)
