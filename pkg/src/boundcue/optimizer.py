"""Multiscale minimization of the composite objective over Z (and L).

Coarse-to-fine: annotations, mask and image are downsampled by factors of
two; each level runs limited-memory BFGS on the unconstrained objective
(reflectance is eliminated, heights outside the mask are fixed at zero
and excluded from the parameter vector); the coarse solution is
bilinearly upsampled with doubled heights to seed the next level.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage
import scipy.optimize

from .annotations import (
    AnnotationSet,
    Polyline,
    build_annotation_set,
    rasterize_polyline,
)
from .energies import CueWeights, FoldConfig, total_energy
from .geometry import HeightField
from .gsm import GsmParams
from .shading import (
    IlluminationPrior,
    IlluminationSH,
    LogImage,
    ReflectanceMap,
    eliminate_reflectance,
    g_reflectance,
    h_illumination,
    render_log_shading,
    render_vjp,
)

VARIANT_NAMES = ("silh", "selfocc", "folds", "occ_folds", "shading", "shading_occ_folds")

_VARIANT_DELTAS = {
    "silh": {},
    "selfocc": {"delta_selfocc": 1.0},
    "folds": {"delta_fold": 1.0},
    "occ_folds": {"delta_selfocc": 1.0, "delta_fold": 1.0},
    "shading": {"delta_sfs": 1.0},
    "shading_occ_folds": {"delta_sfs": 1.0, "delta_selfocc": 1.0, "delta_fold": 1.0},
}


def variant_weights(name: str) -> CueWeights:
    """Binary cue weights of the six named algorithm variants; silhouette
    and regularization are always on."""
    if name not in _VARIANT_DELTAS:
        raise ValueError(f"unknown variant {name!r}; valid: {VARIANT_NAMES}")
    return CueWeights(delta_sfc=1.0, delta_reg=1.0, **_VARIANT_DELTAS[name])


@dataclass(frozen=True)
class VariantSpec:
    name: str
    weights: CueWeights

    @classmethod
    def named(cls, name: str):
        return cls(name=name, weights=variant_weights(name))

    @property
    def uses_shading(self):
        return self.weights.delta_sfs > 0


@dataclass
class SolveConfig:
    levels: int | None = None  # None: halve until min dimension <= 16
    max_iters: int = 400
    tol: float = 1e-7  # relative energy decrease
    memory: int = 10
    init: str = "dome"  # "dome" (half distance transform) or "flat"
    init_z: np.ndarray | None = None
    init_light: IlluminationSH | None = None
    min_dim: int = 16

    def __post_init__(self):
        if self.levels is not None and self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.init not in ("dome", "flat"):
            raise ValueError("init must be 'dome' or 'flat'")

    @classmethod
    def from_dict(cls, d):
        solver = d.get("solver", d)
        kw = {}
        if "levels" in solver:
            kw["levels"] = None if solver["levels"] in (None, "auto") else int(solver["levels"])
        if "max_iters" in solver:
            kw["max_iters"] = int(solver["max_iters"])
        if "tol" in solver:
            kw["tol"] = float(solver["tol"])
        if "memory" in solver:
            kw["memory"] = int(solver["memory"])
        if "init" in solver:
            kw["init"] = str(solver["init"])
        return cls(**kw)


@dataclass
class TraceRow:
    level: int
    iteration: int
    values: dict
    total: float


@dataclass
class SolveResult:
    height: HeightField
    light: IlluminationSH | None
    reflectance: ReflectanceMap | None
    trace: list
    diagnostics: dict
    converged: bool


class EnergyInitError(RuntimeError):
    """Raised when a term is non-finite at initialization."""

    def __init__(self, term):
        self.term = term
        super().__init__(f"{term} is non-finite at initialization")


def downsample_mask(mask):
    h, w = mask.shape
    h2, w2 = (h + 1) // 2, (w + 1) // 2
    pad = np.zeros((h2 * 2, w2 * 2), dtype=mask.dtype)
    pad[:h, :w] = mask
    blocks = pad.reshape(h2, 2, w2, 2).sum(axis=(1, 3))
    return blocks >= 2  # majority vote, ties to figure


def downsample_image(img):
    h, w = img.shape[:2]
    h2, w2 = (h + 1) // 2, (w + 1) // 2
    pad = np.empty((h2 * 2, w2 * 2) + img.shape[2:], dtype=img.dtype)
    pad[:h, :w] = img
    pad[h:, :w] = img[h - 1 :, :]
    pad[:h, w:] = img[:, w - 1 :]
    pad[h:, w:] = img[h - 1 :, w - 1 :]
    return pad.reshape((h2, 2, w2, 2) + img.shape[2:]).mean(axis=(1, 3))


def downsample_annotations(aset: AnnotationSet, factor: int = 2) -> AnnotationSet:
    """Halve an annotation set: rescale polylines, majority-vote the mask,
    re-rasterize and re-infer tangents and normals."""
    if factor != 2:
        raise ValueError("only factor 2 is supported")
    mask = downsample_mask(aset.mask)
    h2, w2 = mask.shape
    polylines = []
    dropped = 0
    for p in aset.polylines:
        pts = p.points * 0.5
        pts[:, 0] = np.clip(pts[:, 0], 0.0, w2 - 1.0)
        pts[:, 1] = np.clip(pts[:, 1], 0.0, h2 - 1.0)
        keep = [pts[0]]
        for q in pts[1:]:
            if not np.all(q == keep[-1]):
                keep.append(q)
        if len(keep) >= 2:
            poly = Polyline(
                kind=p.kind,
                points=np.asarray(keep),
                convexity=p.convexity,
                figure_side=p.figure_side,
            )
            if len(rasterize_polyline(poly)) >= 2:
                polylines.append(poly)
                continue
        dropped += 1  # contour collapsed below two pixels
    out = build_annotation_set(mask, polylines)
    out.warn("contours_dropped", dropped)
    return out


def upsample_heights(z, shape):
    """Bilinear upsample to `shape` with heights scaled by the zoom."""
    zy = shape[0] / z.shape[0]
    zx = shape[1] / z.shape[1]
    out = scipy.ndimage.zoom(z, (zy, zx), order=1, mode="nearest", grid_mode=True)
    return out[: shape[0], : shape[1]] * 0.5 * (zy + zx)


def initial_heights(mask, policy):
    if policy == "flat":
        return np.zeros(mask.shape)
    dist = scipy.ndimage.distance_transform_edt(mask)
    return 0.5 * dist


def _pyramid(annotations, image, levels, min_dim):
    """List of (annotations, image) from fine to coarse."""
    levels_list = [(annotations, image)]
    a, im = annotations, image
    while True:
        if levels is not None:
            if len(levels_list) >= levels:
                break
        elif min(a.mask.shape) <= min_dim:
            break
        a = downsample_annotations(a)
        im = None if im is None else LogImage(downsample_image(im.values), a.mask)
        levels_list.append((a, im))
        if min(a.mask.shape) <= 4:
            break
    return levels_list[::-1]  # coarse first


def _check_finite(values):
    for term, v in values.items():
        if not np.isfinite(v):
            raise EnergyInitError(term)


def solve(
    image: LogImage | None,
    annotations: AnnotationSet,
    variant: VariantSpec | str,
    cfg: SolveConfig | None = None,
    fold_cfg: FoldConfig | None = None,
    gsm: GsmParams | None = None,
    gsm_reflectance: GsmParams | None = None,
    prior: IlluminationPrior | None = None,
    progress=None,
) -> SolveResult:
    if isinstance(variant, str):
        variant = VariantSpec.named(variant)
    cfg = cfg or SolveConfig()
    fold_cfg = fold_cfg or FoldConfig()
    gsm = gsm or GsmParams()
    gsm_reflectance = gsm_reflectance or GsmParams()
    prior = prior or IlluminationPrior.default()
    if variant.uses_shading and image is None:
        raise ValueError(f"variant {variant.name!r} requires an image")
    if not annotations.mask.any():
        raise ValueError("annotation mask is empty")

    t0 = time.perf_counter()
    pyramid = _pyramid(annotations, image if variant.uses_shading else None,
                       cfg.levels, cfg.min_dim)
    n_levels = len(pyramid)
    w = variant.weights

    z = None
    light = cfg.init_light or IlluminationSH.from_flat(prior.mean)
    trace = []
    diagnostics = {
        "levels": n_levels,
        "variant": variant.name,
        "skipped_samples": {},
        "clamped_irradiance": 0,
        "line_search_failures": 0,
    }
    converged = True

    for li, (aset, img) in enumerate(pyramid):
        mask = aset.mask
        if z is None:
            if cfg.init_z is not None:
                z = np.asarray(cfg.init_z, dtype=np.float64)
                for _ in range(n_levels - 1):
                    z = downsample_image(z) * 0.5
                z = z[: mask.shape[0], : mask.shape[1]]
            else:
                z = initial_heights(mask, cfg.init)
        z = np.where(mask, z, 0.0)
        idx = np.nonzero(mask)
        x0 = z[idx]
        nz = x0.size
        shading_on = variant.uses_shading
        if shading_on:
            x0 = np.concatenate([x0, light.flat()])

        state = {"report": None, "clamped": 0}

        def unpack(x):
            zz = np.zeros(mask.shape)
            zz[idx] = x[:nz]
            lt = IlluminationSH.from_flat(x[nz:]) if shading_on else None
            return HeightField(zz, mask), lt

        def objective(x, with_grad=True):
            hf, lt = unpack(x)
            rep = total_energy(
                hf, aset, w, fold_cfg=fold_cfg, gsm=gsm, with_gradients=with_grad
            )
            total = rep.total
            grad_z = rep.total_gradient if with_grad else None
            grad_l = None
            if shading_on:
                s, cache, clamped = render_log_shading(hf, lt)
                state["clamped"] = clamped
                refl = ReflectanceMap(img.values - s)
                gv, gr = g_reflectance(refl, mask, gsm_reflectance)
                hv, hl = h_illumination(lt, prior)
                rep.values["g_reflectance"] = gv
                rep.values["h_illumination"] = hv
                total = total + w.delta_sfs * (gv + hv)
                if with_grad:
                    gz_s, gl_s = render_vjp(hf, cache, -gr)  # dR = -dS
                    grad_z = grad_z + w.delta_sfs * gz_s
                    grad_l = w.delta_sfs * (gl_s + hl)
            rep.total = float(total)
            state["report"] = rep
            if not with_grad:
                return rep
            g = grad_z[idx]
            if shading_on:
                g = np.concatenate([g, grad_l.ravel()])
            return float(total), g

        f0, _ = objective(x0)
        _check_finite(state["report"].values)
        for k, v in state["report"].skipped.items():
            diagnostics["skipped_samples"][k] = (
                diagnostics["skipped_samples"].get(k, 0) + v
            )
        it_counter = {"n": 0}
        trace.append(
            TraceRow(level=li, iteration=0, values=dict(state["report"].values),
                     total=state["report"].total)
        )

        def callback(xk):
            it_counter["n"] += 1
            rep = objective(xk, with_grad=False)
            trace.append(
                TraceRow(
                    level=li,
                    iteration=it_counter["n"],
                    values=dict(rep.values),
                    total=rep.total,
                )
            )

        res = scipy.optimize.minimize(
            objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            callback=callback,
            options={
                "maxiter": cfg.max_iters,
                "maxcor": cfg.memory,
                "ftol": cfg.tol,
                "gtol": 1e-10,
            },
        )
        if not res.success and "ABNORMAL" in str(res.message).upper():
            diagnostics["line_search_failures"] += 1
            converged = False
        x_best = res.x if res.fun <= f0 else x0
        hf, lt = unpack(x_best)
        z = hf.values
        if shading_on:
            light = lt
        diagnostics["clamped_irradiance"] += state["clamped"]
        diagnostics[f"level_{li}"] = {
            "shape": list(mask.shape),
            "iterations": int(res.nit),
            "final_energy": float(res.fun),
            "grad_inf_norm": float(np.max(np.abs(res.jac))) if res.jac is not None else None,
        }
        if progress is not None:
            progress(li + 1, n_levels)
        if li + 1 < n_levels:
            z = upsample_heights(z, pyramid[li + 1][0].mask.shape)

    final = HeightField(np.where(annotations.mask, z, 0.0), annotations.mask)
    refl = None
    if variant.uses_shading:
        refl = eliminate_reflectance(image, final, light)
    diagnostics["wall_time_s"] = time.perf_counter() - t0
    return SolveResult(
        height=final,
        light=light if variant.uses_shading else None,
        reflectance=refl,
        trace=trace,
        diagnostics=diagnostics,
        converged=converged,
    )
