import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbobench.algorithms import (
    crossover_biased,
    lognormal_rate,
    mutate_strength,
    ollga_update,
    one_point_crossover,
    roulette_select,
    sample_bin,
    sample_bin_gt0,
    sample_norm_gt0,
    sample_power_law,
    two_rate_update,
    umda_update_model,
)
from pbobench.rng import Rng

seeds = st.integers(min_value=1, max_value=2**31 - 2)


def random_bits(rng, n):
    return np.random.default_rng(rng).integers(0, 2, n).astype(np.uint8)


# ----------------------------------------------------------------- mutation


def test_mutate_extremes():
    x = random_bits(1, 30)
    rng = Rng(4)
    assert np.array_equal(mutate_strength(x, 0, rng), x)
    assert np.array_equal(mutate_strength(x, 30, rng), 1 - x)
    with pytest.raises(ValueError):
        mutate_strength(x, 31, rng)


@given(seeds, st.integers(1, 80), st.data())
@settings(max_examples=200, deadline=None)
def test_mutate_flips_exactly_ell(seed, n, data):
    ell = data.draw(st.integers(0, n))
    x = random_bits(seed, n)
    y = mutate_strength(x, ell, Rng(seed))
    assert y.shape == x.shape
    assert int(np.sum(x != y)) == ell


def test_mutate_positions_uniform():
    rng = Rng(31)
    x = np.zeros(5, np.uint8)
    counts = np.zeros(5)
    for _ in range(50_000):
        counts += mutate_strength(x, 2, rng)
    assert np.allclose(counts / 50_000, 0.4, atol=0.01)


# --------------------------------------------------------------- binomials


def test_bin_gt0_pmf():
    rng = Rng(2718)
    draws = np.array([sample_bin_gt0(100, 0.01, rng) for _ in range(100_000)])
    assert draws.min() >= 1
    p1 = 100 * 0.01 * 0.99**99 / (1 - 0.99**100)
    assert abs(np.mean(draws == 1) - p1) <= 0.01
    assert abs(np.mean(draws == 1) - 0.5816) <= 0.01
    mean = 100 * 0.01 / (1 - 0.99**100)
    assert abs(draws.mean() - mean) / mean <= 0.01


@pytest.mark.parametrize("n,p", [(10, 0.5), (64, 0.3), (20, 0.95), (625, 1 / 625)])
def test_bin_gt0_matches_conditional_pmf(n, p):
    rng = Rng(n)
    draws = np.array([sample_bin_gt0(n, p, rng) for _ in range(40_000)])
    q0 = (1 - p) ** n
    for k in range(1, 4):
        pk = math.comb(n, k) * p**k * (1 - p) ** (n - k) / (1 - q0)
        assert abs(np.mean(draws == k) - pk) <= 0.01


def test_bin_gt0_errors():
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            sample_bin_gt0(10, p, Rng(1))


def test_bin_mean():
    rng = Rng(8)
    draws = [sample_bin(50, 2 / 50, rng) for _ in range(50_000)]
    assert abs(np.mean(draws) - 2) <= 0.03
    assert sample_bin(10, 0.0, rng) == 0
    assert sample_bin(10, 1.0, rng) == 10


# ---------------------------------------------------------------- power law


def test_power_law_n4():
    rng = Rng(99)
    draws = np.array([sample_power_law(4, 1.5, rng) for _ in range(100_000)])
    p1 = 1 / (1 + 2**-1.5)
    assert abs(p1 - 0.7388) < 1e-4
    assert abs(np.mean(draws == 1) - p1) <= 0.01
    assert abs(np.mean(draws == 2) - (1 - p1)) <= 0.01
    assert set(draws.tolist()) == {1, 2}


@given(seeds, st.integers(2, 300))
@settings(max_examples=100, deadline=None)
def test_power_law_support(seed, n):
    rng = Rng(seed)
    for _ in range(20):
        assert 1 <= sample_power_law(n, 1.5, rng) <= n // 2


def test_power_law_errors():
    with pytest.raises(ValueError):
        sample_power_law(1, 1.5, Rng(1))
    with pytest.raises(ValueError):
        sample_power_law(10, 1.0, Rng(1))


# ------------------------------------------------------------------- normal


def test_norm_degenerate():
    assert sample_norm_gt0(3.2, 0.0, 10, Rng(1)) == 3
    assert sample_norm_gt0(0.2, 0.0, 10, Rng(1)) == 1


def test_norm_mean():
    n, r = 100, 50.0
    rng = Rng(5)
    draws = np.array([sample_norm_gt0(r, r * (1 - r / n), n, rng) for _ in range(100_000)])
    assert abs(draws.mean() - r) / r <= 0.02


@given(seeds, st.integers(1, 200), st.floats(0.01, 1.0), st.floats(0, 50))
@settings(max_examples=200, deadline=None)
def test_norm_range(seed, n, frac, var):
    rng = Rng(seed)
    v = sample_norm_gt0(frac * n, var, n, rng)
    assert 1 <= v <= n


# ---------------------------------------------------------------- crossover


def test_biased_crossover_identical_parents():
    x = random_bits(2, 40)
    assert np.array_equal(crossover_biased(x, x.copy(), 0.3, Rng(3)), x)


@given(seeds, st.integers(1, 60), st.floats(0.001, 1.0))
@settings(max_examples=150, deadline=None)
def test_biased_crossover_mixes_parents(seed, n, c):
    x, xs = random_bits(seed, n), random_bits(seed + 1, n)
    y = crossover_biased(x, xs, c, Rng(seed))
    assert np.all((y == x) | (y == xs))


def test_biased_crossover_mean_copy():
    n, c = 50, 0.02
    x, xs = np.zeros(n, np.uint8), np.ones(n, np.uint8)
    rng = Rng(77)
    copied = [int(crossover_biased(x, xs, c, rng).sum()) for _ in range(40_000)]
    expected = n * c / (1 - (1 - c) ** n)
    assert abs(np.mean(copied) - expected) / expected <= 0.02


@given(seeds, st.integers(1, 60))
@settings(max_examples=150, deadline=None)
def test_one_point_crossover(seed, n):
    x1, x2 = random_bits(seed, n), random_bits(seed + 7, n)
    y1, y2 = one_point_crossover(x1, x2, Rng(seed))
    assert np.array_equal(np.minimum(y1, y2), np.minimum(x1, x2))
    assert np.array_equal(np.maximum(y1, y2), np.maximum(x1, x2))
    # a single cut point: y1 follows x1 up to it and x2 afterwards
    cut = next((i for i in range(n) if y1[i] != x1[i]), n)
    assert np.array_equal(y1[cut:], x2[cut:])
    z1, z2 = one_point_crossover(x1, x1.copy(), Rng(seed))
    assert np.array_equal(z1, x1) and np.array_equal(z2, x1)


def test_one_point_cut_covers_full_prefix():
    x1, x2 = np.zeros(3, np.uint8), np.ones(3, np.uint8)
    rng = Rng(10)
    seen = set()
    for _ in range(3000):
        y1, _ = one_point_crossover(x1, x2, rng)
        seen.add(int(y1.sum()))
    # cut point n keeps both parents intact
    assert seen == {0, 1, 2}


# ----------------------------------------------------------------- roulette


def test_roulette_windowed():
    rng = Rng(123)
    picks = np.array([roulette_select([2.0, 4.0, 6.0], rng) for _ in range(100_000)])
    freq = np.bincount(picks, minlength=3) / picks.size
    assert np.allclose(freq, [0, 1 / 3, 2 / 3], atol=0.01)
    assert {roulette_select([-10.0, -10.0, 20.0], rng) for _ in range(1000)} == {2}


def test_roulette_uniform_when_equal():
    rng = Rng(9)
    picks = np.array([roulette_select([5.0] * 4, rng) for _ in range(40_000)])
    assert np.allclose(np.bincount(picks) / picks.size, 0.25, atol=0.01)
    with pytest.raises(ValueError):
        roulette_select([], rng)


# ------------------------------------------------------------------ updates


def test_two_rate_update_rules():
    n = 64
    # halving with probability 3/4 after a low-group win
    rng = Rng(55)
    outs = [two_rate_update(8.0, True, n, rng) for _ in range(40_000)]
    assert set(outs) == {4.0, 16.0}
    assert abs(np.mean(np.array(outs) == 4.0) - 0.75) <= 0.01
    outs = [two_rate_update(8.0, False, n, rng) for _ in range(40_000)]
    assert abs(np.mean(np.array(outs) == 4.0) - 0.25) <= 0.01
    assert {two_rate_update(2.0, True, n, rng) for _ in range(200)} <= {2.0, 4.0}
    assert {two_rate_update(16.0, False, n, rng) for _ in range(200)} <= {8.0, 16.0}


def test_two_rate_q_half_halves():
    # find a state whose next uniform is about 0.5 and replay it
    rng = Rng(1)
    while True:
        probe = rng.copy()
        if 0.45 < probe.uniform() < 0.55:
            break
        rng.next()
    assert two_rate_update(8.0, True, 64, rng) == 4.0


@given(seeds, st.integers(8, 1000), st.booleans())
@settings(max_examples=200, deadline=None)
def test_two_rate_bounds(seed, n, low):
    rng = Rng(seed)
    r = 2.0
    for _ in range(30):
        r = two_rate_update(r, low, n, rng)
        assert 2.0 <= r <= n / 4


def test_ollga_update_examples():
    assert ollga_update(3.0, "improved", 1.5, 64) == pytest.approx(2.0)
    assert ollga_update(1.0, "improved", 1.5, 64) == 1.0
    assert ollga_update(3.0, "worse", 1.5, 64) == pytest.approx(3 * 1.5**0.25)
    assert ollga_update(3.0, "worse", 1.5, 64) == pytest.approx(3.3200, abs=1e-4)
    assert ollga_update(3.0, "equal", 1.5, 64) == pytest.approx(3 * 1.5**0.25)
    assert ollga_update(64.0, "worse", 1.5, 64) == 64.0
    with pytest.raises(ValueError):
        ollga_update(2.0, "better", 1.5, 64)


@given(st.lists(st.sampled_from(["improved", "equal", "worse"]), max_size=100), st.integers(1, 500))
@settings(max_examples=200, deadline=None)
def test_ollga_bounds(outcomes, n):
    lam = 1.0
    for o in outcomes:
        lam = ollga_update(lam, o, 1.5, n)
        assert 1.0 <= lam <= n


def test_lognormal_median():
    rng = Rng(47)
    vals = np.array([lognormal_rate(0.2, rng) for _ in range(100_000)])
    assert 0.19 <= np.median(vals) <= 0.21
    assert np.all((vals > 0) & (vals < 1))


@given(seeds, st.floats(1e-6, 1 - 1e-6))
@settings(max_examples=200, deadline=None)
def test_lognormal_inside_unit_interval(seed, p):
    v = lognormal_rate(p, Rng(seed))
    assert 0.0 < v < 1.0


# -------------------------------------------------------------------- UMDA


def test_umda_model_examples():
    s, n = 50, 10
    sel = np.zeros((25, n), np.uint8)
    sel[:20, 0] = 1
    sel[:, 2] = 1
    p = umda_update_model(sel, s, n)
    assert p[0] == pytest.approx(0.8)
    assert p[1] == pytest.approx(1 / n)
    assert p[2] == pytest.approx(1 - 1 / n)


@given(seeds, st.integers(2, 40))
@settings(max_examples=150, deadline=None)
def test_umda_model_bounds(seed, n):
    sel = random_bits(seed, 25 * n).reshape(25, n)
    p = umda_update_model(sel, 50)
    assert np.all(p >= 1 / n - 1e-15) and np.all(p <= 1 - 1 / n + 1e-15)
