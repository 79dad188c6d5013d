"""Height-field differential geometry: normals, mean curvature, adjoints.

Conventions: x grows rightward (columns), y downward (rows), the viewer
looks along -z, so height-field normals always have a positive z
component.  Heights are in pixel units.  A viewer-facing dome has
positive mean curvature.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass
class HeightField:
    """Heights over the image grid plus the binary figure support."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)
        if self.values.ndim != 2 or self.values.shape != self.mask.shape:
            raise ValueError("values and mask must be 2-D arrays of the same shape")
        h, w = self.values.shape
        if h < 3 or w < 3:
            raise ValueError("height field must be at least 3x3")
        if not np.all(np.isfinite(self.values[self.mask])):
            raise ValueError("non-finite heights inside the mask")
        self._active = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def active(self):
        """Mask pixels with at least two in-mask 4-neighbours.

        Pixels below that threshold have no usable derivative stencil and
        are dropped from every energy term.
        """
        if self._active is None:
            m = self.mask
            count = np.zeros(m.shape, dtype=np.int8)
            count[:, 1:] += m[:, :-1]
            count[:, :-1] += m[:, 1:]
            count[1:, :] += m[:-1, :]
            count[:-1, :] += m[1:, :]
            self._active = m & (count >= 2)
        return self._active


def normals(z: HeightField) -> np.ndarray:
    """Unit surface normals (H, W, 3); (0, 0, 1) off the mask."""
    n, _ = normals_with_cache(z)
    return n


def normals_with_cache(z: HeightField):
    p = kernels.grad_x(z.values, z.mask)
    q = kernels.grad_y(z.values, z.mask)
    s = 1.0 / np.sqrt(1.0 + p * p + q * q)
    n = np.empty(z.shape + (3,), dtype=np.float64)
    n[..., 0] = -p * s
    n[..., 1] = -q * s
    n[..., 2] = s
    return n, (p, q, s)


def normals_vjp(z: HeightField, cotangent, cache=None) -> np.ndarray:
    """Gradient of <normals(Z), cotangent> with respect to Z."""
    if cache is None:
        _, cache = normals_with_cache(z)
    p, q, s = cache
    cx = cotangent[..., 0]
    cy = cotangent[..., 1]
    cz = cotangent[..., 2]
    s3 = s * s * s
    a = cx * (-s + p * p * s3) + cy * (p * q * s3) + cz * (-p * s3)
    b = cx * (p * q * s3) + cy * (-s + q * q * s3) + cz * (-q * s3)
    return kernels.grad_x_adj(a, z.mask) + kernels.grad_y_adj(b, z.mask)


def mean_curvature(z: HeightField) -> np.ndarray:
    h, _ = mean_curvature_with_cache(z)
    return h


def mean_curvature_with_cache(z: HeightField):
    m = z.mask
    p = kernels.grad_x(z.values, m)
    q = kernels.grad_y(z.values, m)
    r = kernels.second_x(z.values, m)
    t = kernels.second_y(z.values, m)
    s = kernels.grad_y(p, m)  # mixed partial as a composition
    num = (1.0 + p * p) * t - 2.0 * p * q * s + (1.0 + q * q) * r
    sq = np.sqrt(1.0 + p * p + q * q)
    den = 2.0 * sq**3
    # negated so a viewer-facing dome comes out positive
    h = -num / den
    return h, (p, q, r, t, s, num, sq, den)


def mean_curvature_vjp(z: HeightField, cotangent, cache=None) -> np.ndarray:
    if cache is None:
        _, cache = mean_curvature_with_cache(z)
    p, q, r, t, s, num, sq, den = cache
    m = z.mask
    den2 = den * den
    d_p = -(2.0 * p * t - 2.0 * q * s) / den + num * 6.0 * p * sq / den2
    d_q = -(2.0 * q * r - 2.0 * p * s) / den + num * 6.0 * q * sq / den2
    d_r = -(1.0 + q * q) / den
    d_t = -(1.0 + p * p) / den
    d_s = 2.0 * p * q / den
    g = kernels.grad_x_adj(cotangent * d_p, m)
    g += kernels.grad_y_adj(cotangent * d_q, m)
    g += kernels.second_x_adj(cotangent * d_r, m)
    g += kernels.second_y_adj(cotangent * d_t, m)
    g += kernels.grad_x_adj(kernels.grad_y_adj(cotangent * d_s, m), m)
    return g


def jacobian_vjp(z: HeightField, cotangent) -> np.ndarray:
    """Gradient of <output, cotangent> w.r.t. Z.

    Dispatches on the cotangent's shape: (H, W, 3) pairs with normals,
    (H, W) with mean curvature.
    """
    cotangent = np.asarray(cotangent, dtype=np.float64)
    if cotangent.shape == z.shape + (3,):
        return normals_vjp(z, cotangent)
    if cotangent.shape == z.shape:
        return mean_curvature_vjp(z, cotangent)
    raise ValueError(f"cotangent shape {cotangent.shape} matches no output")
