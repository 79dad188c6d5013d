"""On-disk formats: BCZF height fields, PFM, OBJ meshes, PNG images,
config files, illumination JSON and energy-trace CSV.

BCZF: 16-byte header (magic "BCZF", u32 width, u32 height, u32 flags)
followed by row-major little-endian float32 heights; flag bit 0 marks an
appended row-major u8 mask.
"""

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .geometry import HeightField
from .shading import IlluminationPrior, IlluminationSH

BCZF_MAGIC = b"BCZF"
FLAG_HAS_MASK = 1


def write_bczf(path, hf: HeightField):
    h, w = hf.shape
    with open(path, "wb") as f:
        f.write(BCZF_MAGIC)
        f.write(struct.pack("<III", w, h, FLAG_HAS_MASK))
        f.write(hf.values.astype("<f4").tobytes())
        f.write(hf.mask.astype(np.uint8).tobytes())


def read_bczf(path) -> HeightField:
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16 or header[:4] != BCZF_MAGIC:
            raise ValueError(f"{path}: not a BCZF file")
        w, h, flags = struct.unpack("<III", header[4:])
        values = np.frombuffer(f.read(4 * w * h), dtype="<f4").reshape(h, w)
        if flags & FLAG_HAS_MASK:
            mask = np.frombuffer(f.read(w * h), dtype=np.uint8).reshape(h, w) > 0
        else:
            mask = np.ones((h, w), dtype=bool)
    return HeightField(values.astype(np.float64), mask)


def write_pfm(path, values):
    """Grayscale little-endian PFM; rows are written bottom-up per spec."""
    arr = np.asarray(values, dtype="<f4")
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{arr.shape[1]} {arr.shape[0]}\n".encode())
        f.write(b"-1.0\n")
        f.write(arr[::-1].tobytes())


def read_pfm(path):
    with open(path, "rb") as f:
        if f.readline().strip() != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM")
        w, h = map(int, f.readline().split())
        scale = float(f.readline())
        data = np.frombuffer(f.read(4 * w * h), dtype="<f4" if scale < 0 else ">f4")
    return data.reshape(h, w)[::-1].astype(np.float64)


def write_obj(path, hf: HeightField):
    """Triangulated mesh: two triangles per pixel quad whose four corners
    are all inside the mask.  y is negated so the mesh is upright in
    standard viewers."""
    h, w = hf.shape
    index = np.zeros((h, w), dtype=np.int64)
    lines = ["# boundcue height-field mesh"]
    vid = 0
    ys, xs = np.nonzero(hf.mask)
    for y, x in zip(ys, xs):
        vid += 1
        index[y, x] = vid
        lines.append(f"v {x} {-y} {hf.values[y, x]:.6f}")
    quad = hf.mask[:-1, :-1] & hf.mask[:-1, 1:] & hf.mask[1:, :-1] & hf.mask[1:, 1:]
    qys, qxs = np.nonzero(quad)
    for y, x in zip(qys, qxs):
        a = index[y, x]
        b = index[y, x + 1]
        c = index[y + 1, x]
        d = index[y + 1, x + 1]
        lines.append(f"f {a} {c} {b}")
        lines.append(f"f {b} {c} {d}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_normals_png(path, hf: HeightField):
    from .geometry import normals

    n = normals(hf)
    rgb = ((n + 1.0) * 0.5 * 255.0).astype(np.uint8)
    rgb[~hf.mask] = 0
    write_png(path, rgb)


def write_png(path, arr):
    """8- or 16-bit PNG from float in [0, 1] or integer arrays."""
    import cv2

    arr = np.asarray(arr)
    if arr.dtype in (np.float32, np.float64):
        arr = (np.clip(arr, 0.0, 1.0) * 65535.0 + 0.5).astype(np.uint16)
    if arr.ndim == 3:
        arr = arr[..., ::-1]  # RGB -> BGR for OpenCV
    if not cv2.imwrite(str(path), arr):
        raise IOError(f"failed to write {path}")


def read_png(path):
    """PNG as float in [0, 1], shape (H, W) or (H, W, 3)."""
    import cv2

    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise IOError(f"failed to read {path}")
    if img.ndim == 3:
        img = img[..., :3][..., ::-1]  # BGR(A) -> RGB
    scale = 65535.0 if img.dtype == np.uint16 else 255.0
    return img.astype(np.float64) / scale


def load_config(path) -> dict:
    """TOML or JSON config file keyed by section (fold, gsm, reg, solver)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib
    except ImportError:  # python < 3.11
        import tomli as tomllib
    return tomllib.loads(text)


def load_illumination(path) -> IlluminationSH:
    """JSON array of 27 numbers, channel-major."""
    data = json.loads(Path(path).read_text())
    return IlluminationSH.from_flat(np.asarray(data, dtype=np.float64))


def save_illumination(path, light: IlluminationSH):
    Path(path).write_text(json.dumps(list(map(float, light.flat()))))


def load_illumination_prior(path) -> IlluminationPrior:
    data = json.loads(Path(path).read_text())
    return IlluminationPrior(
        np.asarray(data["mean"], dtype=np.float64),
        np.asarray(data["precision"], dtype=np.float64),
    )


def save_illumination_prior(path, prior: IlluminationPrior):
    Path(path).write_text(
        json.dumps({"mean": prior.mean.tolist(), "precision": prior.precision.tolist()})
    )


TRACE_TERMS = ("f_sfc", "f_selfocc", "f_fold", "f_flat", "f_smooth",
               "g_reflectance", "h_illumination")


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["level", "iter", *TRACE_TERMS, "total"])
        for row in trace:
            writer.writerow(
                [row.level, row.iteration]
                + [row.values.get(t, "") for t in TRACE_TERMS]
                + [row.total]
            )
