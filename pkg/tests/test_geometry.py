import numpy as np
import pytest

from boundcue.geometry import (
    HeightField,
    jacobian_vjp,
    mean_curvature,
    normals,
)

from helpers import fd_gradient, rel_linf, random_height_field, hemisphere_field


def full_field(z):
    return HeightField(z, np.ones(z.shape, dtype=bool))


def test_flat_plane_normals():
    z = full_field(np.zeros((8, 8)))
    n = normals(z)
    assert np.allclose(n[..., 2], 1.0)
    assert np.allclose(n[..., :2], 0.0)


def test_tilted_plane_normals():
    xx = np.tile(np.arange(8, dtype=np.float64), (8, 1))
    n = normals(full_field(xx))
    # Z = x gives N = (-1, 0, 1)/sqrt(2) everywhere, borders included
    # (one-sided differences are exact on a plane)
    assert np.allclose(n[..., 0], -np.sqrt(0.5))
    assert np.allclose(n[..., 1], 0.0)
    assert np.allclose(n[..., 2], np.sqrt(0.5))


def test_hemisphere_normals_analytic():
    hf, (cx, cy, r) = hemisphere_field(64, 16.0)
    n = normals(hf)
    # apex
    assert np.allclose(n[32, 32], [0.0, 0.0, 1.0], atol=0.01)
    # at (x, y) = (8, 0) from centre the analytic normal is (x, y, z)/r
    px, py = int(cx + 8), int(cy)
    z8 = np.sqrt(r * r - 64.0)
    expected = np.array([8.0, 0.0, z8]) / r
    assert np.all(np.abs(n[py, px] - expected) < 0.05)


def test_normals_unit_and_translation_invariant():
    rng = np.random.default_rng(0)
    hf = random_height_field(rng, 12)
    n = normals(hf)
    norms = np.linalg.norm(n, axis=-1)
    assert np.allclose(norms[hf.mask], 1.0, atol=1e-9)
    shifted = HeightField(hf.values + 3.7, hf.mask)
    assert np.allclose(normals(shifted), n)


def test_steeper_surface_tilts_normals():
    rng = np.random.default_rng(4)
    hf = random_height_field(rng, 10)
    n1 = normals(hf)
    n2 = normals(HeightField(1.8 * hf.values, hf.mask))
    assert np.all(n2[hf.mask][:, 2] <= n1[hf.mask][:, 2] + 1e-12)


def test_mean_curvature_plane_and_offset():
    z = np.tile(np.arange(9, dtype=np.float64), (9, 1))
    h = mean_curvature(full_field(z))
    assert np.allclose(h, 0.0, atol=1e-12)
    rng = np.random.default_rng(1)
    hf = random_height_field(rng, 11)
    h1 = mean_curvature(hf)
    h2 = mean_curvature(HeightField(hf.values + 5.0, hf.mask))
    assert np.allclose(h1, h2)


def test_mean_curvature_hemisphere():
    hf, (cx, cy, r) = hemisphere_field(64, 20.0)
    h = mean_curvature(hf)
    yy, xx = np.mgrid[0:64, 0:64].astype(np.float64)
    interior = (xx - cx) ** 2 + (yy - cy) ** 2 <= (r - 6) ** 2
    vals = h[interior]
    # dome positive, magnitude ~ 1/r away from the rim
    assert np.all(vals > 0)
    assert np.all(np.abs(vals - 1.0 / r) < 0.1 / r)


@pytest.mark.parametrize("which", ["normals", "curvature"])
def test_jacobian_vjp_matches_finite_differences(which):
    rng = np.random.default_rng(42)
    for _ in range(4):
        hf = random_height_field(rng, 8)
        if which == "normals":
            cot = rng.standard_normal(hf.shape + (3,))

            def pairing(zflat):
                f = HeightField(zflat.reshape(hf.shape), hf.mask)
                return float(np.sum(normals(f) * cot))

        else:
            cot = rng.standard_normal(hf.shape)

            def pairing(zflat):
                f = HeightField(zflat.reshape(hf.shape), hf.mask)
                return float(np.sum(mean_curvature(f) * cot))

        g = jacobian_vjp(hf, cot)
        g_fd = fd_gradient(pairing, hf.values.ravel(), step=1e-5).reshape(hf.shape)
        tol = 1e-5 if which == "normals" else 1e-4
        assert rel_linf(g, g_fd) <= tol


def test_jacobian_vjp_zero_cotangent():
    rng = np.random.default_rng(2)
    hf = random_height_field(rng, 9)
    assert np.all(jacobian_vjp(hf, np.zeros(hf.shape + (3,))) == 0.0)


def test_height_field_validation():
    with pytest.raises(ValueError):
        HeightField(np.zeros((2, 5)), np.ones((2, 5), dtype=bool))
    bad = np.zeros((5, 5))
    bad[2, 2] = np.nan
    with pytest.raises(ValueError):
        HeightField(bad, np.ones((5, 5), dtype=bool))
    # nan outside the mask is fine
    m = np.ones((5, 5), dtype=bool)
    m[2, 2] = False
    HeightField(bad, m)
