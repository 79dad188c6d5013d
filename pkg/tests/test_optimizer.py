import numpy as np
import pytest

from boundcue.annotations import (
    AnnotationSet,
    ContourKind,
    Polyline,
    build_annotation_set,
)
from boundcue.energies import CueWeights, total_energy
from boundcue.geometry import HeightField
from boundcue.gsm import GsmParams
from boundcue.metrics import n_mse
from boundcue.optimizer import (
    EnergyInitError,
    SolveConfig,
    VariantSpec,
    downsample_annotations,
    initial_heights,
    solve,
    upsample_heights,
    variant_weights,
)
from boundcue.synth import make_scene, render_scene


# --------------------------------------------------------------------------
# variant weight patterns


def test_variant_weight_patterns():
    w = variant_weights("silh")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs, w.delta_reg) == (
        1, 0, 0, 0, 1,
    )
    w = variant_weights("selfocc")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs) == (1, 1, 0, 0)
    w = variant_weights("folds")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs) == (1, 0, 1, 0)
    w = variant_weights("occ_folds")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs) == (1, 1, 1, 0)
    assert w.delta_reg == 1
    w = variant_weights("shading")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs) == (1, 0, 0, 1)
    w = variant_weights("shading_occ_folds")
    assert (w.delta_sfc, w.delta_selfocc, w.delta_fold, w.delta_sfs) == (1, 1, 1, 1)
    assert all(
        w.lambda_f == 1 and w.lambda_k == 1
        for w in map(variant_weights, ["silh", "occ_folds"])
    )


def test_unknown_variant_lists_names():
    with pytest.raises(ValueError) as exc:
        variant_weights("everything")
    assert "silh" in str(exc.value)


# --------------------------------------------------------------------------
# pyramids


def test_downsample_straight_chain():
    mask = np.ones((16, 16), dtype=bool)
    aset = build_annotation_set(
        mask, [Polyline(ContourKind.SILHOUETTE_SHARP, [[0, 4], [15, 4]])]
    )
    assert len(aset.samples_sharp) == 16
    down = downsample_annotations(aset)
    assert down.mask.shape == (8, 8)
    assert len(down.samples_sharp) == 8
    assert all(s.tangent == (1.0, 0.0) for s in down.samples_sharp)


def test_downsample_circle_mask_area():
    yy, xx = np.mgrid[0:48, 0:48]
    mask = (xx - 24) ** 2 + (yy - 24) ** 2 <= 20 * 20
    aset = AnnotationSet(width=48, height=48, mask=mask)
    down = downsample_annotations(aset)
    assert down.mask.shape == (24, 24)
    assert abs(down.mask.sum() - mask.sum() / 4) <= 0.1 * mask.sum() / 4


def test_downsample_empty_set():
    mask = np.ones((10, 10), dtype=bool)
    aset = AnnotationSet(width=10, height=10, mask=mask)
    down = downsample_annotations(aset)
    assert down.polylines == []
    assert down.samples_smooth == []


def test_downsample_drops_degenerate_contours():
    mask = np.ones((12, 12), dtype=bool)
    aset = build_annotation_set(
        mask, [Polyline(ContourKind.SILHOUETTE_SHARP, [[4, 4], [4.6, 4.4]])]
    )
    down = downsample_annotations(aset)
    assert down.warnings.get("contours_dropped", 0) == 1


def test_upsample_scales_heights():
    z = np.ones((8, 8))
    up = upsample_heights(z, (16, 16))
    assert up.shape == (16, 16)
    assert np.allclose(up, 2.0)


# --------------------------------------------------------------------------
# solving


def test_solve_decreases_energy_every_variant():
    scene = make_scene("composite", 64)
    img = render_scene(scene)
    for name in ["silh", "selfocc", "folds", "occ_folds", "shading", "shading_occ_folds"]:
        spec = VariantSpec.named(name)
        res = solve(
            img if spec.uses_shading else None,
            scene.annotations,
            spec,
            SolveConfig(max_iters=30),
        )
        per_level = {}
        for row in res.trace:
            per_level.setdefault(row.level, []).append(row.total)
        for level, totals in per_level.items():
            assert totals[-1] <= totals[0] + 1e-9
            # monotone after accepted steps
            for a, b in zip(totals, totals[1:]):
                assert b <= a + 1e-6 * max(1.0, abs(a))


def test_solve_deterministic():
    scene = make_scene("wedge", 32)
    cfg = SolveConfig(max_iters=60)
    r1 = solve(None, scene.annotations, "folds", cfg)
    r2 = solve(None, scene.annotations, "folds", cfg)
    assert np.array_equal(r1.height.values, r2.height.values)


def test_sharp_silhouette_only_stays_near_flat():
    mask = np.zeros((32, 32), dtype=bool)
    mask[6:26, 6:26] = True
    aset = build_annotation_set(
        mask,
        [Polyline(ContourKind.SILHOUETTE_SHARP, [[6, 6], [25, 6], [25, 25], [6, 25], [6, 6]])],
    )
    res = solve(None, aset, "silh", SolveConfig(max_iters=2000))
    z = res.height.values[mask]
    ys, xs = np.nonzero(mask)
    a = np.stack([xs, ys, np.ones_like(xs)], axis=1).astype(np.float64)
    coef, *_ = np.linalg.lstsq(a, z, rcond=None)
    resid = np.abs(z - a @ coef)
    assert resid.mean() <= 0.05 * 32


def test_two_slabs_emergent_height():
    scene = make_scene("two_slabs", 48)
    res = solve(None, scene.annotations, "selfocc", SolveConfig(max_iters=2000))
    z = res.height.values
    cols = np.arange(z.shape[1])[None, :]
    m = scene.z_star.mask
    split = scene.split
    fg = z[m & (cols >= split - 3) & (cols < split)].mean()
    bg = z[m & (cols >= split) & (cols < split + 3)].mean()
    assert fg - bg > 0.0


def test_wedge_folds_beat_silh():
    scene = make_scene("wedge", 32)
    cfg = SolveConfig(max_iters=8000, tol=1e-12)
    r_silh = solve(None, scene.annotations, "silh", cfg)
    r_folds = solve(None, scene.annotations, "folds", cfg)
    assert n_mse(r_folds.height, scene.z_star) < n_mse(r_silh.height, scene.z_star)


def test_gradient_norm_drops_on_well_conditioned_scene():
    scene = make_scene("wedge", 32)
    gentle = GsmParams(sigmas=np.array([0.1, 0.5, 2.0]), weights=np.array([0.5, 0.3, 0.2]))
    res = solve(
        None,
        scene.annotations,
        "folds",
        SolveConfig(levels=1, max_iters=8000, tol=1e-14),
        gsm=gentle,
    )
    z0 = np.where(scene.annotations.mask, initial_heights(scene.annotations.mask, "dome"), 0.0)
    rep = total_energy(
        HeightField(z0, scene.annotations.mask),
        scene.annotations,
        variant_weights("folds"),
        gsm=gentle,
    )
    g0 = np.max(np.abs(rep.total_gradient))
    assert res.diagnostics["level_0"]["grad_inf_norm"] <= 1e-3 * g0


def test_term_values_identical_across_variants():
    # weights scale the sum, never the term definitions
    scene = make_scene("composite", 64)
    z = HeightField(
        np.where(scene.annotations.mask, initial_heights(scene.annotations.mask, "dome"), 0.0),
        scene.annotations.mask,
    )
    reps = {
        name: total_energy(z, scene.annotations, variant_weights(name), with_gradients=False)
        for name in ["silh", "occ_folds"]
    }
    assert reps["silh"].values == reps["occ_folds"].values


def test_shading_variant_requires_image():
    scene = make_scene("hemisphere", 64)
    with pytest.raises(ValueError):
        solve(None, scene.annotations, "shading", SolveConfig(max_iters=5))


def test_empty_mask_rejected():
    aset = AnnotationSet(width=16, height=16, mask=np.zeros((16, 16), dtype=bool))
    with pytest.raises(ValueError):
        solve(None, aset, "silh")


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_init_names_term():
    scene = make_scene("wedge", 32)
    h, w = scene.annotations.mask.shape
    bad = 1e200 * np.tile(np.arange(w, dtype=np.float64), (h, 1))
    with pytest.raises(EnergyInitError) as exc:
        solve(
            None,
            scene.annotations,
            "silh",
            SolveConfig(levels=1, max_iters=5, init_z=bad),
        )
    assert exc.value.term in ("f_flat", "f_smooth", "f_sfc")


def test_shading_from_ground_truth_does_not_increase_energy():
    scene = make_scene("hemisphere", 64)
    img = render_scene(scene)
    cfg = SolveConfig(levels=1, max_iters=200, init_z=scene.z_star.values,
                      init_light=scene.l_star)
    res = solve(img, scene.annotations, "shading", cfg)
    assert res.trace[-1].total <= res.trace[0].total + 1e-9
    # the eliminated reflectance stays defined and finite
    assert np.all(np.isfinite(res.reflectance.values[scene.z_star.mask]))


def test_solve_config_from_dict():
    cfg = SolveConfig.from_dict(
        {"solver": {"levels": 2, "max_iters": 77, "tol": 1e-5, "memory": 7, "init": "flat"}}
    )
    assert (cfg.levels, cfg.max_iters, cfg.tol, cfg.memory, cfg.init) == (
        2, 77, 1e-5, 7, "flat",
    )
    assert SolveConfig.from_dict({"solver": {"levels": "auto"}}).levels is None
    with pytest.raises(ValueError):
        SolveConfig(init="random")
