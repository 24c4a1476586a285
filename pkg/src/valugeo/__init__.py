"""Zonal Minkowski valuations, centroid and intersection bodies, and their
affine isoperimetric inequalities, evaluated numerically in R^3."""
from .bodies import (Ball, Combination, ConvexBody, Ellipsoid, GeometryError, PerturbedBall, Polytope,
                     RadialCombination, RadialField, StarBody, StarPolytope, SupportField, Zonotope,
                     body_from_json, minkowski_combine)
from .corpus import CorpusBody, default_corpus, generate
from .sphere import Subspace, ZonalMeasure, build_grid, kappa
from .verify import CHECK_IDS, Config, InequalityReport, check, run_suite

__version__ = "0.1.0"

__all__ = [
    "Ball", "Combination", "ConvexBody", "Ellipsoid", "GeometryError", "PerturbedBall", "Polytope",
    "RadialCombination", "RadialField", "StarBody", "StarPolytope", "SupportField", "Zonotope",
    "body_from_json", "minkowski_combine", "CorpusBody", "default_corpus", "generate", "Subspace",
    "ZonalMeasure", "build_grid", "kappa", "CHECK_IDS", "Config", "InequalityReport", "check",
    "run_suite",
]
