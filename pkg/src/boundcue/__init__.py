"""boundcue: height-field reconstruction from labelled boundary cues.

An orthographic image annotated with silhouette (smooth/sharp),
self-occlusion (with figure/ground) and fold (convex/concave) contours is
turned into a 2.5D surface by minimizing a composite energy; optional
shading terms jointly recover log-albedo and second-order
spherical-harmonic illumination.
"""

from .annotations import (
    AnnotationSet,
    ContourKind,
    Convexity,
    FigureSide,
    Polyline,
    parse_annotations,
    serialize_annotations,
)
from .energies import CueWeights, EnergyReport, FoldConfig, total_energy
from .geometry import HeightField, jacobian_vjp, mean_curvature, normals
from .gsm import GsmParams
from .metrics import MetricReport, evaluate, n_mse, z_mae
from .optimizer import SolveConfig, SolveResult, VariantSpec, solve, variant_weights
from .shading import (
    IlluminationPrior,
    IlluminationSH,
    LogImage,
    ReflectanceMap,
    eliminate_reflectance,
    render_log_shading,
)
from .synth import SyntheticScene, make_scene, render_scene

__all__ = [
    "AnnotationSet",
    "ContourKind",
    "Convexity",
    "CueWeights",
    "EnergyReport",
    "FigureSide",
    "FoldConfig",
    "GsmParams",
    "HeightField",
    "IlluminationPrior",
    "IlluminationSH",
    "LogImage",
    "MetricReport",
    "Polyline",
    "ReflectanceMap",
    "SolveConfig",
    "SolveResult",
    "SyntheticScene",
    "VariantSpec",
    "eliminate_reflectance",
    "evaluate",
    "jacobian_vjp",
    "make_scene",
    "mean_curvature",
    "n_mse",
    "normals",
    "parse_annotations",
    "render_log_shading",
    "render_scene",
    "serialize_annotations",
    "solve",
    "total_energy",
    "variant_weights",
    "z_mae",
]

__version__ = "0.1.0"
