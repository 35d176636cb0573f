"""Dual Orlicz curvature measures of polytopes and a solver for the discrete
dual Orlicz-Minkowski problem in dimensions 2 and 3."""

from .density import DensityClaims, PowerLawDensity, RadialDensity, GeneralDensity, TailBounds, radial_exp_density
from .geometry import HPolytope, StarBody, ball, cube, octahedron, regular_polygon, square
from .measures import DiscreteMeasure, curvature_measure, quermass
from .solver import SolverConfig, SolverResult, solve

__version__ = "0.1.0"

__all__ = [
    "DensityClaims", "PowerLawDensity", "RadialDensity", "GeneralDensity", "TailBounds", "radial_exp_density",
    "HPolytope", "StarBody", "ball", "cube", "octahedron", "regular_polygon", "square",
    "DiscreteMeasure", "curvature_measure", "quermass",
    "SolverConfig", "SolverResult", "solve",
]
