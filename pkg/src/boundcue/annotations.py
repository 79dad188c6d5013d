"""Boundary-cue annotations: polylines, per-pixel contour samples, file I/O.

Coordinates are image coordinates: x rightward, y downward, origin at the
top-left pixel centre.  Sub-pixel polyline points are allowed; pixels are
produced by round-half-up, matching the probe rounding of the fold term.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ContourKind(str, Enum):
    SILHOUETTE_SMOOTH = "silhouette_smooth"
    SILHOUETTE_SHARP = "silhouette_sharp"
    SELF_OCCLUSION = "self_occlusion"
    FOLD = "fold"


class Convexity(str, Enum):
    CONVEX = "convex"
    CONCAVE = "concave"


class FigureSide(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class AnnotationError(ValueError):
    pass


class SchemaError(AnnotationError):
    """Malformed document; `field` is the offending field path."""

    def __init__(self, field_path, message):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


class BoundsError(AnnotationError):
    """Polyline leaves the image; `index` is the polyline index."""

    def __init__(self, index, message):
        self.index = index
        super().__init__(f"contours[{index}]: {message}")


def _rnd(v: float) -> int:
    """Round half up, the convention used for probes and chain pixels."""
    return int(math.floor(v + 0.5))


@dataclass
class Polyline:
    kind: ContourKind
    points: np.ndarray  # (n, 2) float, columns (x, y)
    convexity: Convexity | None = None
    figure_side: FigureSide | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 2:
            raise AnnotationError("polyline needs at least two (x, y) points")
        if np.any(np.all(self.points[1:] == self.points[:-1], axis=1)):
            raise AnnotationError("consecutive polyline points must be distinct")
        if (self.kind == ContourKind.FOLD) != (self.convexity is not None):
            raise AnnotationError("convexity is required for folds and only folds")
        if (self.kind == ContourKind.SELF_OCCLUSION) != (self.figure_side is not None):
            raise AnnotationError(
                "figure_side is required for self-occlusions and only those"
            )


@dataclass(frozen=True)
class ContourSample:
    pixel: tuple[int, int]  # (x, y)
    tangent: tuple[float, float]
    kind: ContourKind
    target_normal: tuple[float, float] | None = None


@dataclass(frozen=True)
class FoldSample:
    pixel: tuple[int, int]
    tangent: tuple[float, float]
    v: tuple[float, float]  # perpendicular, sign-flipped when concave
    probe_left: tuple[int, int]
    probe_right: tuple[int, int]


@dataclass
class AnnotationSet:
    width: int
    height: int
    mask: np.ndarray  # (H, W) bool, figure = True
    polylines: list = field(default_factory=list)
    samples_smooth: list = field(default_factory=list)
    samples_sharp: list = field(default_factory=list)
    samples_selfocc: list = field(default_factory=list)
    samples_fold: list = field(default_factory=list)
    warnings: dict = field(default_factory=dict)

    def warn(self, key, n=1):
        if n:
            self.warnings[key] = self.warnings.get(key, 0) + n


def rasterize_polyline(p: Polyline):
    """8-connected pixel chain covering the polyline, with segment tangents.

    Supercover grid walk: every pixel cell the segment passes through is
    visited; exact corner crossings step diagonally, so a 45 degree line
    yields only the diagonal pixels.  At vertex pixels claimed by several
    segments the tangent of the longest segment wins (lexicographic
    tie-break on the sign-canonicalized tangent), which makes the chain
    independent of traversal direction up to tangent sign.
    """
    order = []
    best = {}
    for a, b in zip(p.points[:-1], p.points[1:]):
        d = b - a
        length = math.hypot(d[0], d[1])
        tangent = (d[0] / length, d[1] / length)
        canon = max(tangent, (-tangent[0], -tangent[1]))
        key = (length, canon)
        for px in _walk_segment(a, b):
            if px not in best:
                order.append(px)
                best[px] = (key, tangent)
            elif key > best[px][0]:
                best[px] = (key, tangent)
    return [(px, best[px][1]) for px in order]


def _walk_segment(a, b):
    x0, y0 = float(a[0]), float(a[1])
    x1, y1 = float(b[0]), float(b[1])
    cx, cy = _rnd(x0), _rnd(y0)
    ex, ey = _rnd(x1), _rnd(y1)
    dx, dy = x1 - x0, y1 - y0
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    # parametric distance to the next vertical / horizontal cell boundary
    if dx != 0:
        bx = cx + 0.5 * sx
        tmx = (bx - x0) / dx
        tdx = abs(1.0 / dx)
    else:
        tmx, tdx = math.inf, math.inf
    if dy != 0:
        by = cy + 0.5 * sy
        tmy = (by - y0) / dy
        tdy = abs(1.0 / dy)
    else:
        tmy, tdy = math.inf, math.inf

    cells = [(cx, cy)]
    guard = 0
    limit = 2 * (abs(ex - cx) + abs(ey - cy)) + 8
    while (cx, cy) != (ex, ey) and guard < limit:
        guard += 1
        if abs(tmx - tmy) < 1e-12:  # exact corner: step diagonally
            cx += sx
            cy += sy
            tmx += tdx
            tmy += tdy
        elif tmx < tmy:
            cx += sx
            tmx += tdx
        else:
            cy += sy
            tmy += tdy
        cells.append((cx, cy))
    return cells


def _occupancy(mask, x, y):
    """Mean mask occupancy of the 3x3 window around (x, y); out of bounds
    counts as background."""
    h, w = mask.shape
    total = 0.0
    for yy in range(y - 1, y + 2):
        for xx in range(x - 1, x + 2):
            if 0 <= yy < h and 0 <= xx < w and mask[yy, xx]:
                total += 1.0
    return total / 9.0


def _visual_left(u):
    # screen-left of the direction of travel (y grows downward)
    return (u[1], -u[0])


def contour_normals(chain, mask=None, figure_side: FigureSide | None = None,
                    kind=ContourKind.SILHOUETTE_SMOOTH):
    """Turn a rasterized chain into samples with outward target normals.

    The normal is the tangent rotated 90 degrees, signed to point away
    from the figure: toward lower mask occupancy when inferring from the
    mask, or across the contour away from the labelled figure side.  The
    sample pixel is shifted one pixel onto the figure so the constraint
    lands on foreground surface.
    """
    if mask is None and figure_side is None:
        raise ValueError("need a mask or a figure_side to orient normals")
    h, w = mask.shape if mask is not None else (0, 0)
    samples = []
    ties = 0
    skipped = 0
    for (px, py), u in chain:
        if figure_side is not None:
            fig = _visual_left(u) if figure_side == FigureSide.LEFT else tuple(
                -c for c in _visual_left(u)
            )
            normal = (-fig[0], -fig[1])
        else:
            r1 = (-u[1], u[0])
            occ1 = _occupancy(mask, px + _rnd(r1[0]), py + _rnd(r1[1]))
            occ2 = _occupancy(mask, px - _rnd(r1[0]), py - _rnd(r1[1]))
            if occ1 == occ2:
                ties += 1
                normal = r1
            elif occ1 < occ2:
                normal = r1
            else:
                normal = (-r1[0], -r1[1])
        # shift one pixel toward the figure (opposite the outward normal)
        sx, sy = px - _rnd(normal[0]), py - _rnd(normal[1])
        if mask is not None:
            if 0 <= sy < h and 0 <= sx < w and mask[sy, sx]:
                px, py = sx, sy
            elif not (0 <= py < h and 0 <= px < w and mask[py, px]):
                skipped += 1
                continue
        else:
            px, py = sx, sy
        samples.append(
            ContourSample(pixel=(px, py), tangent=u, kind=kind, target_normal=normal)
        )
    return samples, ties, skipped


def fold_samples(chain, convexity: Convexity, mask):
    """Probe positions on either side of a fold chain.

    v = (-u_y, u_x) for a convex fold, negated for concave; probes are the
    rounded offsets of v from each chain pixel.
    """
    h, w = mask.shape
    out = []
    skipped = 0
    for (px, py), u in chain:
        v = (-u[1], u[0])
        if convexity == Convexity.CONCAVE:
            v = (-v[0], -v[1])
        pl = (px + _rnd(v[0]), py + _rnd(v[1]))
        pr = (px - _rnd(v[0]), py - _rnd(v[1]))
        inb = all(0 <= q[0] < w and 0 <= q[1] < h for q in (pl, pr))
        if not inb or not (mask[pl[1], pl[0]] and mask[pr[1], pr[0]]):
            skipped += 1
            continue
        out.append(
            FoldSample(pixel=(px, py), tangent=u, v=v, probe_left=pl, probe_right=pr)
        )
    return out, skipped


def build_annotation_set(mask, polylines) -> AnnotationSet:
    """Rasterize polylines and infer oriented samples against the mask."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    aset = AnnotationSet(width=w, height=h, mask=mask, polylines=list(polylines))
    chosen = {}
    order = []

    def _rank(sample):
        # canonical preference so deduplication is traversal-order-invariant
        if isinstance(sample, FoldSample):
            return (sample.v, sample.probe_left, sample.probe_right)
        tc = max(sample.tangent, (-sample.tangent[0], -sample.tangent[1]))
        return (sample.target_normal or (), tc)

    def add_unique(dest, sample, kind):
        key = (sample.pixel, kind)
        if key not in chosen:
            order.append((key, dest))
            chosen[key] = sample
        elif _rank(sample) > _rank(chosen[key]):
            chosen[key] = sample

    for idx, p in enumerate(polylines):
        if np.any(p.points[:, 0] < 0) or np.any(p.points[:, 0] > w - 1) or np.any(
            p.points[:, 1] < 0
        ) or np.any(p.points[:, 1] > h - 1):
            raise BoundsError(idx, "polyline leaves the image bounds")
        chain = rasterize_polyline(p)
        if p.kind == ContourKind.SILHOUETTE_SMOOTH:
            samples, ties, skipped = contour_normals(chain, mask=mask, kind=p.kind)
            aset.warn("normal_side_ties", ties)
            aset.warn("samples_off_mask", skipped)
            for s in samples:
                add_unique(aset.samples_smooth, s, p.kind)
        elif p.kind == ContourKind.SILHOUETTE_SHARP:
            # sharp silhouettes add no normal constraint; keep bare samples
            for (px, py), u in chain:
                if mask[py, px]:
                    add_unique(
                        aset.samples_sharp,
                        ContourSample(pixel=(px, py), tangent=u, kind=p.kind),
                        p.kind,
                    )
        elif p.kind == ContourKind.SELF_OCCLUSION:
            samples, _, skipped = contour_normals(
                chain, mask=mask, figure_side=p.figure_side, kind=p.kind
            )
            aset.warn("samples_off_mask", skipped)
            for s in samples:
                add_unique(aset.samples_selfocc, s, p.kind)
        else:
            samples, skipped = fold_samples(chain, p.convexity, mask)
            aset.warn("fold_probes_off_mask", skipped)
            for s in samples:
                add_unique(aset.samples_fold, s, p.kind)
    for key, dest in order:
        dest.append(chosen[key])
    return aset


# ---------------------------------------------------------------------------
# file format

def rle_encode(mask) -> list:
    """Row-major run lengths, alternating and starting with background."""
    flat = np.asarray(mask, dtype=bool).ravel()
    runs = []
    current = False
    count = 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current = v
            count = 1
    runs.append(count)
    return runs


def rle_decode(runs, width, height):
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    val = False
    for r in runs:
        if r < 0 or pos + r > flat.size:
            raise SchemaError("mask", "run lengths do not fit the image")
        flat[pos : pos + r] = val
        pos += r
        val = not val
    if pos != flat.size:
        raise SchemaError("mask", "run lengths do not cover the image")
    return flat.reshape(height, width)


_KIND_VALUES = {k.value for k in ContourKind}


def parse_annotations(document, image_extent=None, base_dir=None) -> AnnotationSet:
    """Parse an annotation JSON document into an AnnotationSet.

    `document` may be a JSON string or an already-decoded dict;
    `image_extent` is an optional (width, height) cross-check.  A string
    mask entry is treated as a path (relative to base_dir) to an image
    file whose nonzero pixels are figure.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"not valid JSON: {e}") from e
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("$", "document must be a JSON object")
    if doc.get("version") != 1:
        raise SchemaError("version", "missing or unsupported (expected 1)")
    image = doc.get("image")
    if not isinstance(image, dict):
        raise SchemaError("image", "missing image extent object")
    try:
        w = int(image["width"])
        h = int(image["height"])
    except (KeyError, TypeError, ValueError):
        raise SchemaError("image", "width/height must be integers")
    if w <= 0 or h <= 0:
        raise SchemaError("image", "width and height must be positive")
    if image_extent is not None and (w, h) != tuple(image_extent):
        raise SchemaError("image", f"extent {(w, h)} does not match {image_extent}")

    mask_field = doc.get("mask")
    if isinstance(mask_field, list):
        mask = rle_decode(mask_field, w, h)
    elif isinstance(mask_field, str):
        import pathlib

        path = pathlib.Path(base_dir or ".") / mask_field
        if not path.exists():
            raise SchemaError("mask", f"mask file not found: {path}")
        import cv2

        img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if img is None or img.shape[:2] != (h, w):
            raise SchemaError("mask", "mask image missing or wrong size")
        mask = np.asarray(img).reshape(h, w, -1)[..., 0] > 0
    else:
        raise SchemaError("mask", "must be an RLE list or a file path")

    contours = doc.get("contours")
    if not isinstance(contours, list):
        raise SchemaError("contours", "must be a list")
    polylines = []
    for i, c in enumerate(contours):
        where = f"contours[{i}]"
        if not isinstance(c, dict):
            raise SchemaError(where, "must be an object")
        kind = c.get("kind")
        if kind not in _KIND_VALUES:
            raise SchemaError(f"{where}.kind", f"unknown kind {kind!r}")
        pts = c.get("points")
        if not isinstance(pts, list) or len(pts) < 2:
            raise SchemaError(f"{where}.points", "need at least two points")
        kind = ContourKind(kind)
        convexity = figure_side = None
        if kind == ContourKind.FOLD:
            if c.get("convexity") not in ("convex", "concave"):
                raise SchemaError(f"{where}.convexity", "fold requires convexity")
            convexity = Convexity(c["convexity"])
        if kind == ContourKind.SELF_OCCLUSION:
            if c.get("figure_side") not in ("left", "right"):
                raise SchemaError(
                    f"{where}.figure_side", "self_occlusion requires figure_side"
                )
            figure_side = FigureSide(c["figure_side"])
        try:
            poly = Polyline(
                kind=kind,
                points=np.asarray(pts, dtype=np.float64),
                convexity=convexity,
                figure_side=figure_side,
            )
        except (AnnotationError, ValueError) as e:
            raise SchemaError(f"{where}.points", str(e)) from e
        polylines.append(poly)

    return build_annotation_set(mask, polylines)


def serialize_annotations(aset: AnnotationSet) -> str:
    """Canonical JSON form; the mask is always stored as inline RLE."""
    contours = []
    for p in aset.polylines:
        c = {"kind": p.kind.value, "points": [[float(x), float(y)] for x, y in p.points]}
        if p.convexity is not None:
            c["convexity"] = p.convexity.value
        if p.figure_side is not None:
            c["figure_side"] = p.figure_side.value
        contours.append(c)
    doc = {
        "version": 1,
        "image": {"width": aset.width, "height": aset.height},
        "mask": rle_encode(aset.mask),
        "contours": contours,
    }
    return json.dumps(doc, indent=1)
