"""Log-space Lambertian shading under second-order spherical harmonics.

Irradiance follows the standard quadratic form in the augmented normal
(n_x, n_y, n_z, 1); coefficients are ordered
[L00, L1-1, L10, L11, L2-2, L2-1, L20, L21, L22] per colour channel,
channel-major on disk.  The rendering constraint R + S(Z, L) - I = 0 is
eliminated by construction: R is never a free variable.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import HeightField, normals_with_cache, normals_vjp
from .gsm import GsmParams
from . import gsm as gsm_mod

# Ramamoorthi-Hanrahan irradiance constants
_C1 = 0.429043
_C2 = 0.511664
_C3 = 0.743125
_C4 = 0.886227
_C5 = 0.247708

IRRADIANCE_FLOOR = 1e-6
LOG_IMAGE_FLOOR = 1e-4


@dataclass
class IlluminationSH:
    """9 spherical-harmonic coefficients per RGB channel, shape (3, 9)."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64).reshape(3, 9)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("illumination coefficients must be finite")

    @classmethod
    def gray(cls, dc=2.0):
        c = np.zeros((3, 9))
        c[:, 0] = dc
        return cls(c)

    def flat(self):
        return self.coeffs.ravel()

    @classmethod
    def from_flat(cls, v):
        return cls(np.asarray(v, dtype=np.float64).reshape(3, 9))


@dataclass
class LogImage:
    values: np.ndarray  # (H, W, 3) log intensities
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.values.ndim != 3 or self.values.shape[2] != 3:
            raise ValueError("log image must be (H, W, 3)")
        if self.values.shape[:2] != self.mask.shape:
            raise ValueError("image and mask shapes differ")
        if not np.all(np.isfinite(self.values[self.mask])):
            raise ValueError("non-finite log intensities inside the mask")

    @classmethod
    def from_intensity(cls, img, mask, floor=LOG_IMAGE_FLOOR):
        img = np.asarray(img, dtype=np.float64)
        if img.ndim == 2:
            img = np.repeat(img[..., None], 3, axis=2)
        return cls(np.log(np.maximum(img, floor)), mask)


@dataclass
class ReflectanceMap:
    values: np.ndarray  # (H, W, 3) log-albedo

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3 or self.values.shape[2] != 3:
            raise ValueError("reflectance must be (H, W, 3)")


@dataclass
class IlluminationPrior:
    mean: np.ndarray  # (27,)
    precision: np.ndarray  # (27, 27), symmetric PSD

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(27)
        self.precision = np.asarray(self.precision, dtype=np.float64).reshape(27, 27)
        if not np.allclose(self.precision, self.precision.T, atol=1e-9):
            raise ValueError("precision must be symmetric")
        if np.min(np.linalg.eigvalsh(self.precision)) < -1e-9:
            raise ValueError("precision must be positive semidefinite")

    @classmethod
    def default(cls):
        # stand-in for the out-of-scope fit to real-world illuminations:
        # gray DC-only mean, weak isotropic precision
        mean = IlluminationSH.gray(2.0).flat()
        return cls(mean, 0.1 * np.eye(27))


def sh_basis(n):
    """Per-pixel 9-vector B(n) with irradiance E = B . L_channel."""
    nx, ny, nz = n[..., 0], n[..., 1], n[..., 2]
    b = np.empty(n.shape[:-1] + (9,), dtype=np.float64)
    b[..., 0] = _C4
    b[..., 1] = 2.0 * _C2 * ny
    b[..., 2] = 2.0 * _C2 * nz
    b[..., 3] = 2.0 * _C2 * nx
    b[..., 4] = 2.0 * _C1 * nx * ny
    b[..., 5] = 2.0 * _C1 * ny * nz
    b[..., 6] = _C3 * nz * nz - _C5
    b[..., 7] = 2.0 * _C1 * nx * nz
    b[..., 8] = _C1 * (nx * nx - ny * ny)
    return b


def _basis_jacobian(n):
    """dB/dn as three (H, W, 9) arrays."""
    nx, ny, nz = n[..., 0], n[..., 1], n[..., 2]
    zero = np.zeros_like(nx)
    dbx = np.stack(
        [zero, zero, zero, np.full_like(nx, 2 * _C2), 2 * _C1 * ny, zero, zero,
         2 * _C1 * nz, 2 * _C1 * nx],
        axis=-1,
    )
    dby = np.stack(
        [zero, np.full_like(nx, 2 * _C2), zero, zero, 2 * _C1 * nx, 2 * _C1 * nz,
         zero, zero, -2 * _C1 * ny],
        axis=-1,
    )
    dbz = np.stack(
        [zero, zero, np.full_like(nx, 2 * _C2), zero, zero, 2 * _C1 * ny,
         2 * _C3 * nz, 2 * _C1 * nx, zero],
        axis=-1,
    )
    return dbx, dby, dbz


def render_log_shading(z: HeightField, light: IlluminationSH):
    """Per-channel log irradiance of the surface; returns (S, cache).

    Nonpositive irradiance is clamped at a small floor (counted in the
    cache) so the optimizer can keep moving; `irradiance_positive`
    pre-checks the strict condition for renderers that must not clamp.
    """
    n, nc = normals_with_cache(z)
    b = sh_basis(n)
    e = np.einsum("hwk,ck->hwc", b, light.coeffs)
    clamped = e <= IRRADIANCE_FLOOR
    e_safe = np.maximum(e, IRRADIANCE_FLOOR)
    s = np.log(e_safe)
    n_clamped = int(np.count_nonzero(clamped & z.mask[..., None]))
    cache = (n, nc, b, e_safe, clamped, light)
    return s, cache, n_clamped


def render_vjp(z: HeightField, cache, cotangent):
    """Gradients of <S, cotangent> with respect to Z and to L."""
    n, nc, b, e_safe, clamped, light = cache
    ds_de = np.where(clamped, 0.0, cotangent / e_safe)  # (H, W, 3)
    g_light = np.einsum("hwc,hwk->ck", ds_de, b)
    dbx, dby, dbz = _basis_jacobian(n)
    lb = light.coeffs  # (3, 9)
    gn = np.empty_like(n)
    gn[..., 0] = np.einsum("hwc,ck,hwk->hw", ds_de, lb, dbx)
    gn[..., 1] = np.einsum("hwc,ck,hwk->hw", ds_de, lb, dby)
    gn[..., 2] = np.einsum("hwc,ck,hwk->hw", ds_de, lb, dbz)
    g_z = normals_vjp(z, gn, cache=nc)
    return g_z, g_light


def irradiance_positive(z: HeightField, light: IlluminationSH) -> bool:
    n, _ = normals_with_cache(z)
    b = sh_basis(n)
    e = np.einsum("hwk,ck->hwc", b, light.coeffs)
    return bool(np.all(e[z.mask] > 0.0))


def eliminate_reflectance(image: LogImage, z: HeightField, light: IlluminationSH) -> ReflectanceMap:
    """R = I - S(Z, L): the rendering constraint holds by construction."""
    s, _, _ = render_log_shading(z, light)
    return ReflectanceMap(image.values - s)


def g_reflectance(r: ReflectanceMap, mask, gsm: GsmParams | None = None):
    """Piecewise-smoothness prior on log-albedo.

    GSM penalty on the magnitude of the RGB difference over 4-neighbour
    in-mask pairs, each unordered pair counted once.
    """
    gsm = gsm or GsmParams()
    mask = np.asarray(mask, dtype=bool)
    rv = r.values
    value = 0.0
    grad = np.zeros_like(rv)
    for axis, (si, sj) in (
        (1, (np.s_[:, :-1], np.s_[:, 1:])),
        (0, (np.s_[:-1, :], np.s_[1:, :])),
    ):
        ok = mask[si] & mask[sj]
        if not ok.any():
            continue
        d = rv[si][ok] - rv[sj][ok]  # (n, 3)
        m = np.linalg.norm(d, axis=1)
        value += float(np.sum(gsm_mod.nll(m, gsm)))
        rho = gsm_mod.slope_ratio(m, gsm)  # c'(m)/m, finite at 0
        gd = rho[:, None] * d
        gi = np.zeros(ok.shape + (3,))
        gi[ok] = gd
        grad[si] += gi
        grad[sj] -= gi
    return value, grad


def h_illumination(light: IlluminationSH, prior: IlluminationPrior | None = None):
    """Gaussian prior on the 27-vector of SH coefficients."""
    prior = prior or IlluminationPrior.default()
    x = light.flat() - prior.mean
    px = prior.precision @ x
    value = 0.5 * float(x @ px)
    return value, px.reshape(3, 9)
