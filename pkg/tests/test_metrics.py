import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundcue.geometry import HeightField
from boundcue.metrics import evaluate, n_mse, z_mae

from helpers import random_height_field


def full_field(z):
    return HeightField(z, np.ones(z.shape, dtype=bool))


def brute_force_z_mae(z, z_star, mask, lo=-100.0, hi=100.0, step=1e-3):
    """Independent oracle: grid search over the translation."""
    d = (z - z_star)[mask]
    ts = np.arange(lo, hi + step, step)
    best = np.inf
    for t in ts:
        best = min(best, np.mean(np.abs(d + t)))
    return best


def test_identical_fields_zero():
    rng = np.random.default_rng(0)
    hf = random_height_field(rng, 12)
    # arccos amplifies float rounding of the self-dot-product to ~1e-8 rad
    assert n_mse(hf, hf) < 1e-12
    assert z_mae(hf, hf) == 0.0


def test_translation_invariance_exact():
    rng = np.random.default_rng(1)
    hf = random_height_field(rng, 12)
    shifted = HeightField(hf.values + 5.0, hf.mask)
    assert z_mae(shifted, hf) == 0.0
    assert n_mse(HeightField(hf.values + 7.0, hf.mask), hf) == pytest.approx(
        n_mse(hf, hf), abs=1e-15
    )
    for c in (0.25, -3.5, 11.0):
        a = z_mae(HeightField(hf.values + c, hf.mask), hf)
        assert a == pytest.approx(0.0, abs=1e-12)


def test_flat_vs_unit_slope_plane():
    xx = np.tile(np.arange(16, dtype=np.float64), (16, 1))
    flat = full_field(np.zeros((16, 16)))
    slope = full_field(xx)
    # angle between (0,0,1) and (-1,0,1)/sqrt(2) is pi/4 everywhere
    assert n_mse(flat, slope) == pytest.approx((math.pi / 4) ** 2, abs=1e-3)


def test_single_pixel_outlier():
    n = 5  # 5x5 = 25 pixels, odd
    z = np.zeros((n, n))
    z_star = z.copy()
    d = 3.0
    z_star[2, 2] += d
    got = z_mae(full_field(z), full_field(z_star))
    assert got == pytest.approx(d / (n * n), abs=1e-12)


def test_symmetry():
    rng = np.random.default_rng(2)
    a = random_height_field(rng, 10)
    b = HeightField(rng.standard_normal((10, 10)), a.mask)
    assert z_mae(a, b) == pytest.approx(z_mae(b, a), abs=1e-12)
    assert n_mse(a, b) == pytest.approx(n_mse(b, a), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_median_shift_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-20, 20, size=(16, 16))
    z_star = rng.uniform(-20, 20, size=(16, 16))
    mask = np.ones((16, 16), dtype=bool)
    got = z_mae(full_field(z), full_field(z_star))
    oracle = brute_force_z_mae(z, z_star, mask)
    assert got <= oracle + 1e-9  # median is exactly optimal
    assert abs(got - oracle) < 1e-3


def test_empty_intersection_errors():
    m1 = np.zeros((8, 8), dtype=bool)
    m1[:4] = True
    m2 = ~m1
    a = HeightField(np.zeros((8, 8)), m1)
    b = HeightField(np.zeros((8, 8)), m2)
    with pytest.raises(ValueError):
        n_mse(a, b)
    with pytest.raises(ValueError):
        z_mae(a, b)


def test_evaluate_report():
    rng = np.random.default_rng(3)
    hf = random_height_field(rng, 12)
    rep = evaluate(hf, hf)
    assert rep.n_mse < 1e-12 and rep.z_mae == 0.0
    assert rep.pixels == int(hf.mask.sum())
    assert rep.to_dict()["pixels"] == rep.pixels
