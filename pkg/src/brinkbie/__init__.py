"""Boundary-integral machinery for the Stokes resolvent (Brinkman) system:
fundamental tensors, layer potentials, a 2D Nystrom Dirichlet solver, and
first-order boundary-perturbation expansions with rate-study experiments.
"""

from ._backend import name as backend_name
from .special import DomainError, ResolventParameter, bessel_k, d_pair_2d, \
    e_pair_2d, ed_quad_3d
from .geometry import Curve2D, PerturbationField, PerturbedCurve2D, \
    SphereSurface, circle, ellipse, star, rho_constant, rho_cosine, rho_zero
from .bie2d import BoundaryData, Density, QuadratureRule, \
    assemble_double_layer, solve_interior_dirichlet, eval_velocity, \
    eval_pressure, eval_single_layer, compatibility_residual
from .perturbation import FirstOrderResult, apply_K1, boundary_taylor, \
    continuity_gap, eval_u1, expansion_kernel_K1, interior_kernel_D1, \
    phi_recursion

__version__ = "0.1.0"

__all__ = [
    "ResolventParameter", "DomainError", "backend_name", "__version__",
    "bessel_k", "e_pair_2d", "d_pair_2d", "ed_quad_3d",
    "Curve2D", "PerturbationField", "PerturbedCurve2D", "SphereSurface",
    "circle", "ellipse", "star", "rho_zero", "rho_constant", "rho_cosine",
    "QuadratureRule", "Density", "BoundaryData",
    "assemble_double_layer", "solve_interior_dirichlet", "eval_velocity",
    "eval_pressure", "eval_single_layer", "compatibility_residual",
    "FirstOrderResult", "boundary_taylor", "expansion_kernel_K1", "apply_K1",
    "phi_recursion", "interior_kernel_D1", "eval_u1", "continuity_gap",
]
