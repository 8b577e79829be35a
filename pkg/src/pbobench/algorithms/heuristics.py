"""Compiled main loops of the twelve reference heuristics.

Every loop samples its initial solution(s) uniformly, evaluates them, then
iterates until :func:`_done` reports an exhausted budget or a hit optimum.
Only transformed values steer the search; raw values are seen by the tracker.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from pbobench.algorithms.operators import (
    _bin,
    _bin_gt0,
    _crossover_biased,
    _flip,
    _lognormal_step,
    _norm_gt0,
    _one_point,
    _power_law,
    _roulette,
    _two_rate_update,
    _umda_frequencies,
)
from pbobench.algorithms.tracker import _done, _evaluate, _finish
from pbobench.rng import _fill_bits, _randint, _shuffle, _uniform


@njit(cache=True)
def _run_ghc(inst, ctx, state):
    n = inst.n
    x = np.empty(n, np.uint8)
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    t = 1
    while not _done(ctx):
        j = t % n
        x[j] ^= 1
        fy = _evaluate(inst, ctx, x)
        if fy >= fx:
            fx = fy
        else:
            x[j] ^= 1
        t += 1
    _finish(ctx)


@njit(cache=True)
def _run_rls(inst, ctx, state):
    n = inst.n
    x = np.empty(n, np.uint8)
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while not _done(ctx):
        j = _randint(state, n)
        x[j] ^= 1
        fy = _evaluate(inst, ctx, x)
        if fy >= fx:
            fx = fy
        else:
            x[j] ^= 1
    _finish(ctx)


@njit(cache=True)
def _run_ea(inst, ctx, state, lam, p):
    """(1+lam) EA with Bin>0(n, p) strengths; first maximum wins ties."""
    n = inst.n
    x = np.empty(n, np.uint8)
    y = np.empty(n, np.uint8)
    best = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        fb = -np.inf
        for _ in range(lam):
            if _done(ctx):
                _finish(ctx)
                return
            y[:] = x
            _flip(state, y, _bin_gt0(state, n, p), marks, pos)
            fy = _evaluate(inst, ctx, y)
            if fy > fb:
                fb = fy
                best, y = y, best
        if fb >= fx:
            x, best = best, x
            fx = fb


@njit(cache=True)
def _run_fga(inst, ctx, state, lam, cdf):
    """(1+lam) fast GA with power-law strengths; the largest index wins ties."""
    n = inst.n
    x = np.empty(n, np.uint8)
    y = np.empty(n, np.uint8)
    best = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        fb = -np.inf
        for _ in range(lam):
            if _done(ctx):
                _finish(ctx)
                return
            y[:] = x
            _flip(state, y, _power_law(state, cdf), marks, pos)
            fy = _evaluate(inst, ctx, y)
            if fy >= fb:
                fb = fy
                best, y = y, best
        if fb >= fx:
            x, best = best, x
            fx = fb


@njit(cache=True)
def _run_two_rate(inst, ctx, state, lam, r_init):
    n = inst.n
    half = lam // 2
    x = np.empty(n, np.uint8)
    pop = np.empty((lam, n), np.uint8)
    f = np.empty(lam)
    ties = np.empty(lam, np.int64)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    r = r_init
    ctx.params[0] = r
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        for i in range(lam):
            if _done(ctx):
                _finish(ctx)
                return
            rate = r / (2.0 * n) if i < half else 2.0 * r / n
            pop[i] = x
            _flip(state, pop[i], _bin_gt0(state, n, rate), marks, pos)
            f[i] = _evaluate(inst, ctx, pop[i])
        fb = f.max()
        count = 0
        for i in range(lam):
            if f[i] == fb:
                ties[count] = i
                count += 1
        star = ties[0] if count == 1 else ties[_randint(state, count)]
        if fb >= fx:
            x[:] = pop[star]
            fx = fb
        r = _two_rate_update(state, r, star < half, n)
        ctx.params[0] = r


@njit(cache=True)
def _run_norm(inst, ctx, state, lam, r_init, F, adapt_var):
    """(1+lam) EA with normal strengths; optionally shrinks the variance by F**c."""
    n = inst.n
    x = np.empty(n, np.uint8)
    y = np.empty(n, np.uint8)
    best = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    r = r_init
    c = 0
    ctx.params[0] = r
    ctx.params[1] = c
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        var = r * (1.0 - r / n)
        if adapt_var:
            var *= F ** c
        fb = -np.inf
        lb = 0
        for _ in range(lam):
            if _done(ctx):
                _finish(ctx)
                return
            ell = _norm_gt0(state, r, var, n)
            y[:] = x
            _flip(state, y, ell, marks, pos)
            fy = _evaluate(inst, ctx, y)
            if fy > fb:
                fb = fy
                lb = ell
                best, y = y, best
        if lb == r:
            c += 1
        else:
            c = 0
        r = float(lb)
        if fb >= fx:
            x, best = best, x
            fx = fb
        ctx.params[0] = r
        ctx.params[1] = c


@njit(cache=True)
def _run_lognormal(inst, ctx, state, lam, p_init):
    n = inst.n
    x = np.empty(n, np.uint8)
    y = np.empty(n, np.uint8)
    best = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    # the rate is carried as log-odds ln((1-p)/p) so it never leaves (0, 1)
    omega = math.log((1.0 - p_init) / p_init)
    ctx.params[0] = p_init
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        fb = -np.inf
        wb = omega
        for _ in range(lam):
            if _done(ctx):
                _finish(ctx)
                return
            w, p = _lognormal_step(state, omega)
            y[:] = x
            _flip(state, y, _bin_gt0(state, n, p), marks, pos)
            fy = _evaluate(inst, ctx, y)
            if fy > fb:
                fb = fy
                wb = w
                best, y = y, best
        omega = wb
        ctx.params[0] = 1.0 / (1.0 + math.exp(omega))
        if fb >= fx:
            x, best = best, x
            fx = fb


@njit(cache=True)
def _run_ollga(inst, ctx, state, F):
    n = inst.n
    x = np.empty(n, np.uint8)
    y = np.empty(n, np.uint8)
    xs = np.empty(n, np.uint8)
    ys = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    lam = 1.0
    up = F ** 0.25
    ctx.params[0] = lam
    _fill_bits(state, x)
    fx = _evaluate(inst, ctx, x)
    while True:
        k = max(1, int(math.floor(lam + 0.5)))
        ell = _bin_gt0(state, n, lam / n)
        fxs = -np.inf
        for _ in range(k):
            if _done(ctx):
                _finish(ctx)
                return
            y[:] = x
            _flip(state, y, ell, marks, pos)
            fy = _evaluate(inst, ctx, y)
            if fy >= fxs:
                fxs = fy
                xs, y = y, xs
        c = 1.0 / lam
        fys = -np.inf
        for _ in range(k):
            moved = _crossover_biased(state, x, xs, c, y, marks, pos)
            # x and xs differ in exactly ell positions
            if moved == 0:
                fy = fx
            elif moved == ell:
                fy = fxs
            else:
                if _done(ctx):
                    _finish(ctx)
                    return
                fy = _evaluate(inst, ctx, y)
            if fy >= fys:
                fys = fy
                ys, y = y, ys
        if fys > fx:
            x, ys = ys, x
            fx = fys
            lam = max(lam / F, 1.0)
        elif fys == fx:
            x, ys = ys, x
            lam = min(lam * up, float(n))
        else:
            lam = min(lam * up, float(n))
        ctx.params[0] = lam


@njit(cache=True)
def _run_vga(inst, ctx, state, mu, pc, pm):
    n = inst.n
    X = np.empty((mu, n), np.uint8)
    Y = np.empty((mu, n), np.uint8)
    fX = np.empty(mu)
    fY = np.empty(mu)
    c1 = np.empty(n, np.uint8)
    c2 = np.empty(n, np.uint8)
    marks = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    for i in range(mu):
        if _done(ctx):
            _finish(ctx)
            return
        _fill_bits(state, X[i])
        fX[i] = _evaluate(inst, ctx, X[i])
    while True:
        for i in range(mu):
            Y[i] = X[_roulette(state, fX)]
        for i in range(mu // 2):
            if _uniform(state) < pc:
                _one_point(state, Y[2 * i], Y[2 * i + 1], c1, c2)
                Y[2 * i] = c1
                Y[2 * i + 1] = c2
        for i in range(mu):
            _flip(state, Y[i], _bin(state, n, pm), marks, pos)
            if _done(ctx):
                _finish(ctx)
                return
            fY[i] = _evaluate(inst, ctx, Y[i])
        X, Y = Y, X
        fX, fY = fY, fX


@njit(cache=True)
def _best_half(state, f, s):
    # random order first so the stable sort breaks ties uniformly
    perm = np.arange(s)
    _shuffle(state, perm)
    order = np.argsort(-f[perm], kind="mergesort")
    return perm[order[: s // 2]]


@njit(cache=True)
def _run_umda(inst, ctx, state, s):
    n = inst.n
    P = np.empty((s, n), np.uint8)
    Q = np.empty((s, n), np.uint8)
    f = np.empty(s)
    g = np.empty(s)
    probs = np.empty(n)
    for i in range(s):
        if _done(ctx):
            _finish(ctx)
            return
        _fill_bits(state, P[i])
        f[i] = _evaluate(inst, ctx, P[i])
    sel = _best_half(state, f, s)
    while True:
        _umda_frequencies(P, sel, s, probs)
        for i in range(s):
            for j in range(n):
                Q[i, j] = 1 if _uniform(state) < probs[j] else 0
            if _done(ctx):
                _finish(ctx)
                return
            g[i] = _evaluate(inst, ctx, Q[i])
        P, Q = Q, P
        f, g = g, f
        sel = _best_half(state, f, s)
