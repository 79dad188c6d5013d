"""Synthetic ground-truth scenes with analytic heights and auto-generated
boundary-cue annotations, plus a forward renderer for the shading tests.

Scene catalogue:
  Hemisphere  smooth silhouette only
  Cube        corner view of a cube: sharp hexagonal silhouette and the
              visible-edge folds radiating from the near corner
  Wedge       roof of configurable dihedral angle with one convex fold
  TwoSlabs    a tall slab occluding a low one: self-occlusion step
  Composite   dome + ridged block + lower terrace: every cue type
"""

import math
from dataclasses import dataclass

import numpy as np

from .annotations import (
    AnnotationSet,
    ContourKind,
    Convexity,
    FigureSide,
    Polyline,
    build_annotation_set,
)
from .geometry import HeightField
from .shading import IlluminationSH, LogImage, ReflectanceMap, irradiance_positive, render_log_shading

KINDS = ("hemisphere", "cube", "wedge", "two_slabs", "composite")


@dataclass
class SyntheticScene:
    name: str
    z_star: HeightField
    annotations: AnnotationSet
    r_star: ReflectanceMap | None = None
    l_star: IlluminationSH | None = None
    image: LogImage | None = None


def make_scene(kind: str, size: int = 64, params: dict | None = None) -> SyntheticScene:
    if size < 32:
        raise ValueError("size must be at least 32")
    params = dict(params or {})
    kind = kind.lower()
    if kind == "hemisphere":
        return _hemisphere(size, params)
    if kind == "cube":
        return _cube(size, params)
    if kind == "wedge":
        return _wedge(size, params)
    if kind == "two_slabs":
        return _two_slabs(size, params)
    if kind == "composite":
        return _composite(size, params)
    raise ValueError(f"unknown scene kind {kind!r}; valid: {KINDS}")


def _circle_polyline(cx, cy, radius, n=None):
    # dense vertices keep the per-pixel tangents close to the true circle
    if n is None:
        n = max(64, int(8 * 2 * math.pi * radius))
    ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
    return np.stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)], axis=1)


def _hemisphere(size, params):
    radius = float(params.get("radius", 0.375 * size))
    cx = cy = float(size // 2)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    rho2 = (xx - cx) ** 2 + (yy - cy) ** 2
    mask = rho2 <= radius * radius
    z = np.where(mask, np.sqrt(np.maximum(radius * radius - rho2, 0.0)), 0.0)
    poly = Polyline(ContourKind.SILHOUETTE_SMOOTH, _circle_polyline(cx, cy, radius))
    aset = build_annotation_set(mask, [poly])
    return SyntheticScene("hemisphere", HeightField(z, mask), aset)


def _wedge(size, params):
    angle = float(params.get("angle_deg", 90.0))
    if not 10.0 < angle < 170.0:
        raise ValueError("wedge angle must lie in (10, 170) degrees")
    slope = 1.0 / math.tan(math.radians(angle) / 2.0)
    margin = max(4, size // 8)
    x0, x1 = margin, size - 1 - margin
    y0, y1 = margin, size - 1 - margin
    mid = size // 2  # integer column so probe stencils stay one-sided of the crease
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    mask = (xx >= x0) & (xx <= x1) & (yy >= y0) & (yy <= y1)
    z = np.where(mask, -slope * np.abs(xx - mid), 0.0)
    z = np.where(mask, z - z[mask].min() + 1.0, 0.0)
    rect = Polyline(
        ContourKind.SILHOUETTE_SHARP,
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]],
    )
    fold = Polyline(
        ContourKind.FOLD,
        [[mid, y0 + 2], [mid, y1 - 2]],
        convexity=Convexity.CONVEX,
    )
    aset = build_annotation_set(mask, [rect, fold])
    return SyntheticScene("wedge", HeightField(z, mask), aset)


def _two_slabs(size, params):
    h_fg = float(params.get("height_fg", 10.0))
    h_bg = float(params.get("height_bg", 4.0))
    margin = max(4, size // 8)
    x0, x1 = margin, size - 1 - margin
    y0, y1 = margin, size - 1 - margin
    split = size // 2  # step sits between columns split-1 and split
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    mask = (xx >= x0) & (xx <= x1) & (yy >= y0) & (yy <= y1)
    z = np.where(xx < split, h_fg, h_bg)
    z = np.where(mask, z, 0.0)
    rect = Polyline(
        ContourKind.SILHOUETTE_SHARP,
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]],
    )
    # travelling +y the foreground (west) side is the visual right
    occ = Polyline(
        ContourKind.SELF_OCCLUSION,
        [[split - 0.5, y0 + 1], [split - 0.5, y1 - 1]],
        figure_side=FigureSide.RIGHT,
    )
    aset = build_annotation_set(mask, [rect, occ])
    scene = SyntheticScene("two_slabs", HeightField(z, mask), aset)
    scene.split = split
    return scene


def _cube(size, params):
    half = float(params.get("half_extent", 0.27 * size))
    cx = cy = float(size // 2)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    x = xx - cx
    y = yy - cy
    # cube rotated so its (1,1,1) diagonal faces the viewer; the three
    # visible faces have these outward normals
    s2, s6, s3 = math.sqrt(2.0), math.sqrt(6.0), math.sqrt(3.0)
    normals3 = [
        (1 / s2, 1 / s6, 1 / s3),
        (-1 / s2, 1 / s6, 1 / s3),
        (0.0, -2 / s6, 1 / s3),
    ]
    z_up = np.full_like(x, np.inf)
    z_dn = np.full_like(x, -np.inf)
    for mx, my, mz in normals3:
        z_up = np.minimum(z_up, (half - mx * x - my * y) / mz)
        z_dn = np.maximum(z_dn, (-half - mx * x - my * y) / mz)
    mask = z_up >= z_dn
    z = np.where(mask, z_up - z_up[mask].min() + 1.0, 0.0)

    # silhouette hexagon: projections of the six equatorial vertices
    verts = []
    for sx, sy, sz in (
        (1, 1, -1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1),
    ):
        px = (sx - sy) / s2 * half
        py = (sx + sy - 2 * sz) / s6 * half
        verts.append((px, py))
    verts.sort(key=lambda p: math.atan2(p[1], p[0]))
    shrink = 0.97
    hexagon = [[cx + shrink * px, cy + shrink * py] for px, py in verts]
    hexagon.append(hexagon[0])
    polylines = [Polyline(ContourKind.SILHOUETTE_SHARP, hexagon)]

    # the three visible cube edges project onto segments from the centre
    # to every other hexagon vertex; label them as convex folds
    rim = math.sqrt(8.0 / 3.0) * half
    for k in range(3):
        ang = math.pi / 2 + k * 2 * math.pi / 3
        dx, dy = math.cos(ang), math.sin(ang)
        p0 = [cx + 2.5 * dx, cy + 2.5 * dy]
        p1 = [cx + (rim - 2.5) * dx, cy + (rim - 2.5) * dy]
        polylines.append(Polyline(ContourKind.FOLD, [p0, p1], convexity=Convexity.CONVEX))
    aset = build_annotation_set(mask, polylines)
    return SyntheticScene("cube", HeightField(z, mask), aset)


def _composite(size, params):
    """Dome (smooth silhouette), accordion-roofed block (sharp silhouette,
    convex and concave folds) and a lower terrace behind it
    (self-occlusion)."""
    w = int(params.get("width", int(size * 1.5)))
    h = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    z = np.zeros((h, w))
    mask = np.zeros((h, w), dtype=bool)
    polylines = []

    # dome on the left
    r = 0.17 * w
    cx, cy = 0.19 * w, 0.5 * h
    rho2 = (xx - cx) ** 2 + (yy - cy) ** 2
    dome = rho2 <= r * r
    mask |= dome
    z = np.where(dome, np.sqrt(np.maximum(r * r - rho2, 0.0)), z)
    polylines.append(
        Polyline(ContourKind.SILHOUETTE_SMOOTH, _circle_polyline(cx, cy, r))
    )

    # block with a zigzag roof: two convex ridges around a concave valley
    bx0 = int(0.40 * w)
    span = 8  # ridge-to-valley run, integer so creases land on columns
    ridge1 = bx0 + span
    valley = ridge1 + span
    ridge2 = valley + span
    bx1 = ridge2 + span
    by0, by1 = int(0.15 * h), int(0.85 * h)
    block = (xx >= bx0) & (xx <= bx1) & (yy >= by0) & (yy <= by1)
    base = 8.0
    pitch = 0.9
    dist_to_valleyline = np.minimum.reduce(
        [np.abs(xx - bx0), np.abs(xx - valley), np.abs(xx - bx1)]
    )
    roof = base + pitch * np.minimum(dist_to_valleyline, float(span))
    tx0 = bx1 + 1
    tx1 = min(w - 3, tx0 + int(0.2 * w))
    ty0, ty1 = int(0.20 * h), int(0.80 * h)
    terrace = (xx >= tx0) & (xx <= tx1) & (yy >= ty0) & (yy <= ty1)
    t_height = 3.0
    mask |= block | terrace
    z = np.where(block, roof, z)
    z = np.where(terrace, t_height, z)

    # outline of block + terrace union (sharp), walking clockwise
    outline = [
        [bx0, by0], [bx1, by0], [bx1, ty0], [tx1, ty0], [tx1, ty1],
        [bx1, ty1], [bx1, by1], [bx0, by1], [bx0, by0],
    ]
    polylines.append(Polyline(ContourKind.SILHOUETTE_SHARP, outline))
    for col, conv in ((ridge1, Convexity.CONVEX), (valley, Convexity.CONCAVE),
                      (ridge2, Convexity.CONVEX)):
        polylines.append(
            Polyline(
                ContourKind.FOLD,
                [[col, by0 + 2], [col, by1 - 2]],
                convexity=conv,
            )
        )
    # step between block east wall and terrace: figure is the block (west)
    polylines.append(
        Polyline(
            ContourKind.SELF_OCCLUSION,
            [[bx1 + 0.5, ty0 + 1], [bx1 + 0.5, ty1 - 1]],
            figure_side=FigureSide.RIGHT,
        )
    )
    aset = build_annotation_set(mask, polylines)
    return SyntheticScene("composite", HeightField(z, mask), aset)


def default_light() -> IlluminationSH:
    """Gray light with a gentle z-aligned band; positive for any normal."""
    light = IlluminationSH.gray(1.0)
    light.coeffs[:, 2] = 0.25
    return light


def default_reflectance(shape) -> ReflectanceMap:
    return ReflectanceMap(np.full(shape + (3,), math.log(0.4)))


def render_scene(scene: SyntheticScene, light: IlluminationSH | None = None,
                 reflectance: ReflectanceMap | None = None) -> LogImage:
    """Forward render I = R + S(Z*, L); the shading objective's optimum
    is then at (Z*, R, L) by construction."""
    light = light or default_light()
    reflectance = reflectance or default_reflectance(scene.z_star.shape)
    if not irradiance_positive(scene.z_star, light):
        raise ValueError("irradiance not positive over the scene; choose a brighter light")
    s, _, _ = render_log_shading(scene.z_star, light)
    image = LogImage(reflectance.values + s, scene.z_star.mask)
    scene.r_star = reflectance
    scene.l_star = light
    scene.image = image
    return image
