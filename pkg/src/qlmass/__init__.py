"""Numerical construction and checks of a quasi-local mass vector in hyperbolic space.

Pipeline: expanding inverse curvature flow -> lapse on the collar -> exterior
extension -> backward transport of the Lorentz weight -> mass functionals.
"""
from .minkowski import AmbientSpace, CausalClass, classify_causal, lorentz_inner, zeta_set
from .geometry import RadialSurface, compute_geometry
from .icf import run_icf, select_T
from .lapse import solve_lapse, boundary_lapse
from .exterior import build_distance_foliation, solve_exterior_v
from .transport import solve_exterior_W, solve_interior_W
from .mass import final_mass, mass_series, verify_monotonicity
from .config import Scenario
from .pipeline import run_pipeline

__all__ = [
    "AmbientSpace", "CausalClass", "classify_causal", "lorentz_inner", "zeta_set",
    "RadialSurface", "compute_geometry", "run_icf", "select_T", "solve_lapse", "boundary_lapse",
    "build_distance_foliation", "solve_exterior_v", "solve_exterior_W", "solve_interior_W",
    "final_mass", "mass_series", "verify_monotonicity", "Scenario", "run_pipeline",
]
__version__ = "0.1.0"
