"""Normal lattice polytopes: hulls, lattice points, normality and quantum jumps."""

from .cone import NormalityVerdict, is_normal, is_normal_bruteforce, lpar
from .hull import DimensionError
from .jumps import (
    JumpVerdict, MaximalityCertificate, accepted_jumps, certify_maximal, height1_jumps, is_jump,
    is_jump_dim3, is_jump_paracrit,
)
from .polytope import (
    FacetForm, FormatError, LatticePolytope, convex_hull, height_over_polytope, lattice_points,
    normalized_volume, stratum, width,
)
from .search import SearchConfig, run_search

__version__ = "0.1.0"

__all__ = [
    "NormalityVerdict", "is_normal", "is_normal_bruteforce", "lpar", "DimensionError",
    "JumpVerdict", "MaximalityCertificate", "accepted_jumps", "certify_maximal", "height1_jumps",
    "is_jump", "is_jump_dim3", "is_jump_paracrit", "FacetForm", "FormatError", "LatticePolytope",
    "convex_hull", "height_over_polytope", "lattice_points", "normalized_volume", "stratum", "width",
    "SearchConfig", "run_search",
]
