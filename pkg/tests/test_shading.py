import numpy as np
import pytest

from boundcue.geometry import HeightField
from boundcue.gsm import GsmParams, nll
from boundcue.shading import (
    IlluminationPrior,
    IlluminationSH,
    LogImage,
    ReflectanceMap,
    eliminate_reflectance,
    g_reflectance,
    h_illumination,
    irradiance_positive,
    render_log_shading,
)

from helpers import random_height_field


def full_field(z):
    return HeightField(z, np.ones(z.shape, dtype=bool))


def test_dc_only_light_is_uniform():
    rng = np.random.default_rng(0)
    hf = random_height_field(rng, 10)
    s, _, clamped = render_log_shading(hf, IlluminationSH.gray(1.0))
    assert clamped == 0
    for c in range(3):
        vals = s[..., c][hf.mask]
        assert np.allclose(vals, vals[0])


def test_z_aligned_band_prefers_upward_normals():
    coeffs = np.zeros((3, 9))
    coeffs[:, 0] = 2.0  # DC keeps irradiance positive
    coeffs[:, 2] = 0.8  # L10, z-aligned linear band
    light = IlluminationSH(coeffs)
    flat = full_field(np.zeros((8, 8)))
    xx = np.tile(np.arange(8, dtype=np.float64), (8, 1))
    tilted = full_field(2.0 * xx)
    s_flat, _, _ = render_log_shading(flat, light)
    s_tilt, _, _ = render_log_shading(tilted, light)
    assert np.all(s_flat[2:6, 2:6] > s_tilt[2:6, 2:6])
    # analytic check at the two normals
    c2, c4 = 0.511664, 0.886227
    e_up = c4 * 2.0 + 2 * c2 * 0.8 * 1.0
    nz = 1.0 / np.sqrt(5.0)
    e_tilt = c4 * 2.0 + 2 * c2 * 0.8 * nz
    assert s_flat[4, 4, 0] == pytest.approx(np.log(e_up), abs=1e-9)
    assert s_tilt[4, 4, 0] == pytest.approx(np.log(e_tilt), abs=1e-9)


def test_clamping_counts_and_proceeds():
    coeffs = np.zeros((3, 9))
    coeffs[:, 0] = -1.0  # negative everywhere
    hf = full_field(np.zeros((6, 6)))
    assert not irradiance_positive(hf, IlluminationSH(coeffs))
    s, _, clamped = render_log_shading(hf, IlluminationSH(coeffs))
    assert clamped == 36 * 3  # counted per pixel-channel
    assert np.all(np.isfinite(s))


def test_eliminate_reflectance_identity_and_roundtrip():
    rng = np.random.default_rng(1)
    hf = random_height_field(rng, 9)
    light = IlluminationSH.gray(2.0)
    light.coeffs[:, 1:4] += 0.2 * rng.standard_normal((3, 3))
    img = LogImage(rng.standard_normal(hf.shape + (3,)), hf.mask)
    r = eliminate_reflectance(img, hf, light)
    s, _, _ = render_log_shading(hf, light)
    # c_sfs(Z, R, L) = R + S - I = 0 to machine precision
    assert np.allclose(r.values + s - img.values, 0.0, atol=1e-15)
    # scaling the image by k shifts R by log k exactly
    k = 3.7
    r2 = eliminate_reflectance(
        LogImage(img.values + np.log(k), hf.mask), hf, light
    )
    assert np.allclose(r2.values, r.values + np.log(k), atol=1e-12)


def test_g_reflectance_constant_zero():
    mask = np.ones((8, 8), dtype=bool)
    r = ReflectanceMap(np.full((8, 8, 3), -0.3))
    v, g = g_reflectance(r, mask)
    assert v == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(g, 0.0, atol=1e-12)


def test_g_reflectance_single_pixel_mask():
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, 2] = True
    v, _ = g_reflectance(ReflectanceMap(np.zeros((5, 5, 3))), mask)
    assert v == 0.0


def test_g_reflectance_robust_sublinear():
    mask = np.ones((6, 6), dtype=bool)

    def two_tone(step):
        r = np.zeros((6, 6, 3))
        r[:, 3:, :] = step
        return ReflectanceMap(r)

    d = 0.4
    v1, _ = g_reflectance(two_tone(d), mask)
    v2, _ = g_reflectance(two_tone(2 * d), mask)
    assert v2 < 4.0 * v1
    assert v1 > 0


def test_h_illumination_quadratic():
    prior = IlluminationPrior(np.zeros(27), np.eye(27))
    l0 = IlluminationSH.from_flat(np.zeros(27))
    v, g = h_illumination(l0, prior)
    assert v == 0.0 and np.all(g == 0.0)
    e1 = np.zeros(27)
    e1[0] = 1.0
    v, g = h_illumination(IlluminationSH.from_flat(e1), prior)
    assert v == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(g.ravel(), e1)


def test_prior_validation():
    with pytest.raises(ValueError):
        IlluminationPrior(np.zeros(27), np.diag(np.full(27, -1.0)))
    bad = np.eye(27)
    bad[0, 1] = 0.5
    with pytest.raises(ValueError):
        IlluminationPrior(np.zeros(27), bad)


def test_render_translation_invariant():
    rng = np.random.default_rng(2)
    hf = random_height_field(rng, 8)
    light = IlluminationSH.gray(2.0)
    s1, _, _ = render_log_shading(hf, light)
    s2, _, _ = render_log_shading(HeightField(hf.values + 4.2, hf.mask), light)
    assert np.allclose(s1, s2)
