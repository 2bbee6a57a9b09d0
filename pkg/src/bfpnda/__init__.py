"""Slab Boltzmann-Fokker-Planck transport with nonlinear diffusion acceleration."""

from .kernels import HGK, SRK, bfp_decompose, hgk_moments, srk_moments
from .quadrature import gauss_legendre, legendre_eval, project_moments
from .solvers import (
    ProblemSpec,
    SolveReport,
    convergence_error,
    dense_reference_solve,
    nda_solve,
    source_iteration,
)

__all__ = [
    "HGK",
    "SRK",
    "ProblemSpec",
    "SolveReport",
    "bfp_decompose",
    "convergence_error",
    "dense_reference_solve",
    "gauss_legendre",
    "hgk_moments",
    "legendre_eval",
    "nda_solve",
    "project_moments",
    "source_iteration",
    "srk_moments",
]
