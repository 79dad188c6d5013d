"""Finite-difference verification of every analytic gradient.

Each term is exercised on randomized small height fields (full and blob
masks) and compared against central finite differences.  The suite is the
backbone of the acceptance gate and of the `gradcheck` CLI command.
"""

import numpy as np

from .annotations import ContourKind, ContourSample, FoldSample
from .energies import FoldConfig, f_flat, f_fold, f_selfocc, f_sfc, f_smooth
from .geometry import HeightField
from .gsm import GsmParams
from .shading import (
    IlluminationPrior,
    IlluminationSH,
    ReflectanceMap,
    g_reflectance,
    h_illumination,
    render_log_shading,
    render_vjp,
)

TERMS = (
    "f_sfc",
    "f_selfocc",
    "f_fold",
    "f_flat",
    "f_smooth",
    "g_reflectance",
    "h_illumination",
    "render_log_shading",
)


def fd_gradient(f, x0, step):
    x0 = np.asarray(x0, dtype=np.float64)
    g = np.zeros_like(x0)
    for k in range(x0.size):
        xp = x0.copy()
        xp.flat[k] += step
        xm = x0.copy()
        xm.flat[k] -= step
        g.flat[k] = (f(xp) - f(xm)) / (2.0 * step)
    return g


def rel_linf(analytic, fd):
    scale = max(np.max(np.abs(fd)), 1e-8)
    return float(np.max(np.abs(analytic - fd)) / scale)


def _smooth_noise(rng, shape, amp):
    z = rng.standard_normal(shape)
    for _ in range(3):
        z = 0.25 * (
            np.roll(z, 1, 0) + np.roll(z, -1, 0) + np.roll(z, 1, 1) + np.roll(z, -1, 1)
        )
    peak = np.max(np.abs(z))
    return amp * z / (peak if peak > 0 else 1.0)


def _random_field(rng, size):
    shape = (size, size)
    z = _smooth_noise(rng, shape, amp=2.0)
    if rng.random() < 0.5:
        mask = np.ones(shape, dtype=bool)
    else:
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        cy = shape[0] / 2 + rng.uniform(-1, 1)
        cx = shape[1] / 2 + rng.uniform(-1, 1)
        r = min(shape) * rng.uniform(0.32, 0.45)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    return HeightField(np.where(mask, z, 0.0), mask)


def _random_normal_samples(rng, hf, kind, n=6):
    ys, xs = np.nonzero(hf.active)
    idx = rng.choice(len(ys), size=min(n, len(ys)), replace=False)
    samples = []
    for i in idx:
        ang = rng.uniform(0, 2 * np.pi)
        tgt = (float(np.cos(ang)), float(np.sin(ang)))
        samples.append(
            ContourSample(
                pixel=(int(xs[i]), int(ys[i])),
                tangent=(-tgt[1], tgt[0]),
                kind=kind,
                target_normal=tgt,
            )
        )
    return samples


def _random_fold_samples(rng, hf, n=5):
    h, w = hf.shape
    act = hf.active
    samples = []
    tries = 0
    while len(samples) < n and tries < 200:
        tries += 1
        x = int(rng.integers(1, w - 1))
        y = int(rng.integers(1, h - 1))
        if rng.random() < 0.5:
            u, v = (0.0, 1.0), (-1.0, 0.0)
        else:
            u, v = (1.0, 0.0), (0.0, 1.0)
        pl = (x + int(round(v[0])), y + int(round(v[1])))
        pr = (x - int(round(v[0])), y - int(round(v[1])))
        if act[pl[1], pl[0]] and act[pr[1], pr[0]]:
            samples.append(
                FoldSample(pixel=(x, y), tangent=u, v=v, probe_left=pl, probe_right=pr)
            )
    return samples


def _check_z_term(term, hf, value_grad, step, corrupt=False):
    v, g = value_grad(hf)
    if corrupt:
        g = g.copy()
        g.flat[g.size // 2] += 0.5

    def scalar(zflat):
        f = HeightField(zflat.reshape(hf.shape), hf.mask)
        return value_grad(f)[0]

    g_fd = fd_gradient(scalar, hf.values.ravel(), step)
    return rel_linf(g, g_fd.reshape(hf.shape))


def run_suite(seed=0, n_instances=20, sizes=(8, 16), step=1e-6, corrupt_term=None):
    """Run every term on randomized instances; returns {term: max rel err}."""
    rng = np.random.default_rng(seed)
    fold_cfg = FoldConfig()
    gsm = GsmParams()
    errs = {t: 0.0 for t in TERMS}
    for i in range(n_instances):
        size = int(rng.integers(sizes[0], sizes[1] + 1))
        hf = _random_field(rng, size)
        corrupt = lambda name: corrupt_term == name

        smooth = _random_normal_samples(rng, hf, ContourKind.SILHOUETTE_SMOOTH)
        errs["f_sfc"] = max(
            errs["f_sfc"],
            _check_z_term(
                "f_sfc", hf, lambda f: f_sfc(f, smooth), step, corrupt("f_sfc")
            ),
        )
        occ = _random_normal_samples(rng, hf, ContourKind.SELF_OCCLUSION)
        errs["f_selfocc"] = max(
            errs["f_selfocc"],
            _check_z_term(
                "f_selfocc", hf, lambda f: f_selfocc(f, occ), step, corrupt("f_selfocc")
            ),
        )
        folds = _random_fold_samples(rng, hf)
        errs["f_fold"] = max(
            errs["f_fold"],
            _check_z_term(
                "f_fold",
                hf,
                lambda f: f_fold(f, folds, cfg=fold_cfg),
                step,
                corrupt("f_fold"),
            ),
        )
        errs["f_flat"] = max(
            errs["f_flat"],
            _check_z_term("f_flat", hf, f_flat, step, corrupt("f_flat")),
        )
        errs["f_smooth"] = max(
            errs["f_smooth"],
            _check_z_term(
                "f_smooth", hf, lambda f: f_smooth(f, gsm), step, corrupt("f_smooth")
            ),
        )

        # reflectance prior, gradient w.r.t. R
        r0 = _smooth_noise(rng, hf.shape, 0.5)
        rmap = np.stack([r0, 0.5 * r0, _smooth_noise(rng, hf.shape, 0.4)], axis=-1)
        v, g = g_reflectance(ReflectanceMap(rmap), hf.mask, gsm)
        if corrupt("g_reflectance"):
            g = g.copy()
            g.flat[0] += 0.5
        g_fd = fd_gradient(
            lambda x: g_reflectance(ReflectanceMap(x.reshape(rmap.shape)), hf.mask, gsm)[0],
            rmap.ravel(),
            step,
        )
        errs["g_reflectance"] = max(
            errs["g_reflectance"], rel_linf(g, g_fd.reshape(rmap.shape))
        )

        # illumination prior, gradient w.r.t. L
        light = IlluminationSH(rng.standard_normal((3, 9)))
        prior = IlluminationPrior.default()
        v, g = h_illumination(light, prior)
        if corrupt("h_illumination"):
            g = g.copy()
            g.flat[0] += 0.5
        g_fd = fd_gradient(
            lambda x: h_illumination(IlluminationSH.from_flat(x), prior)[0],
            light.flat(),
            1e-5,
        )
        errs["h_illumination"] = max(
            errs["h_illumination"], rel_linf(g.ravel(), g_fd)
        )

        # rendering, gradient of sum(S) w.r.t. Z and L jointly
        light = IlluminationSH.gray(2.0)
        light.coeffs[:, 1:] += 0.15 * rng.standard_normal((3, 8))
        cot = rng.standard_normal(hf.shape + (3,))

        def render_sum(zflat, lflat):
            f = HeightField(zflat.reshape(hf.shape), hf.mask)
            s, _, _ = render_log_shading(f, IlluminationSH.from_flat(lflat))
            return float(np.sum(s * cot))

        s, cache, _ = render_log_shading(hf, light)
        gz, gl = render_vjp(hf, cache, cot)
        if corrupt("render_log_shading"):
            gz = gz.copy()
            gz.flat[0] += 0.5
        gz_fd = fd_gradient(
            lambda x: render_sum(x, light.flat()), hf.values.ravel(), step
        )
        gl_fd = fd_gradient(
            lambda x: render_sum(hf.values.ravel(), x), light.flat(), 1e-5
        )
        err = max(
            rel_linf(gz, gz_fd.reshape(hf.shape)), rel_linf(gl.ravel(), gl_fd)
        )
        errs["render_log_shading"] = max(errs["render_log_shading"], err)
    return errs
