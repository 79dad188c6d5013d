"""Shape-accuracy metrics: normal-orientation N-MSE and translation-
invariant depth Z-MAE, both over the intersection of the two masks."""

from dataclasses import dataclass

import numpy as np

from .geometry import HeightField, normals


@dataclass(frozen=True)
class MetricReport:
    n_mse: float  # radians^2
    z_mae: float  # height units
    pixels: int

    def to_dict(self):
        return {"n_mse": self.n_mse, "z_mae": self.z_mae, "pixels": self.pixels}


def _common_mask(z: HeightField, z_star: HeightField):
    if z.shape != z_star.shape:
        raise ValueError("height fields have different shapes")
    common = z.mask & z_star.mask
    if not common.any():
        raise ValueError("empty mask intersection")
    return common


def n_mse(z: HeightField, z_star: HeightField) -> float:
    """Mean squared angle (radians^2) between the two normal fields."""
    common = _common_mask(z, z_star)
    na = normals(z)[common]
    nb = normals(z_star)[common]
    dots = np.clip(np.sum(na * nb, axis=1), -1.0, 1.0)
    theta = np.arccos(dots)
    return float(np.mean(theta * theta))


def z_mae(z: HeightField, z_star: HeightField) -> float:
    """min over t of mean |Z - Z* + t|; the optimal t is the median of
    Z* - Z, which is exact for the L1 objective."""
    common = _common_mask(z, z_star)
    diff = z.values[common] - z_star.values[common]
    t = np.median(-diff)
    return float(np.mean(np.abs(diff + t)))


def evaluate(z: HeightField, z_star: HeightField) -> MetricReport:
    common = _common_mask(z, z_star)
    return MetricReport(
        n_mse=n_mse(z, z_star), z_mae=z_mae(z, z_star), pixels=int(common.sum())
    )
