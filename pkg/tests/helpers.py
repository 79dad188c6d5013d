"""Shared fixtures and independent oracles for the test suite."""

import numpy as np

from boundcue.geometry import HeightField


def fd_gradient(f, x0, step=1e-6):
    """Central finite differences of a scalar function of a flat vector."""
    x0 = np.asarray(x0, dtype=np.float64)
    g = np.zeros_like(x0)
    for k in range(x0.size):
        xp = x0.copy()
        xp.flat[k] += step
        xm = x0.copy()
        xm.flat[k] -= step
        g.flat[k] = (f(xp) - f(xm)) / (2.0 * step)
    return g


def rel_linf(a, b):
    denom = max(np.max(np.abs(b)), 1e-8)
    return np.max(np.abs(a - b)) / denom


def smooth_random_z(rng, shape, amp=2.0):
    """Low-frequency random surface: band-limited noise."""
    z = rng.standard_normal(shape)
    for _ in range(3):
        z = 0.25 * (
            np.roll(z, 1, 0) + np.roll(z, -1, 0) + np.roll(z, 1, 1) + np.roll(z, -1, 1)
        )
    z -= z.mean()
    peak = np.max(np.abs(z))
    return amp * z / (peak if peak > 0 else 1.0)


def blob_mask(rng, shape, p_full=0.5):
    """Either a full mask or a random disc-ish blob with margin."""
    h, w = shape
    if rng.random() < p_full:
        return np.ones(shape, dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    cy = h / 2 + rng.uniform(-1, 1)
    cx = w / 2 + rng.uniform(-1, 1)
    r = min(h, w) * rng.uniform(0.3, 0.45)
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r


def random_height_field(rng, size=None, amp=2.0):
    if size is None:
        size = int(rng.integers(8, 17))
    z = smooth_random_z(rng, (size, size), amp=amp)
    mask = blob_mask(rng, (size, size))
    z = np.where(mask, z, 0.0)
    return HeightField(z, mask)


def hemisphere_field(size=64, radius=24.0):
    # integer centre so the apex lands exactly on a pixel
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy = cx = float(size // 2)
    rho2 = (xx - cx) ** 2 + (yy - cy) ** 2
    mask = rho2 <= radius * radius
    z = np.where(mask, np.sqrt(np.maximum(radius * radius - rho2, 0.0)), 0.0)
    return HeightField(z, mask), (cx, cy, radius)
