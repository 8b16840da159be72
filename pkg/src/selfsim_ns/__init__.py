"""Self-similar steady Navier–Stokes flows in dimension n >= 4.

Spectral solver for (-1)-homogeneous, axisymmetric, swirl-free solutions
driven by (-3)-homogeneous forces, together with checks of the exact
identities such solutions satisfy, a 1D fold model and an A_beta weight scan.
"""
__version__ = "0.1.0"

from .sphere import (AxisymField, ConsistencyError, Grid, ScalarSphereField, build_grid,
                     grad_norm_squared, laplace_beltrami, lp_norm, surface_gradient)
from .forces import ForceSpec, make_force
from .stokes import assemble, green_tensor, picard_map, recover_pressure, solve_stokes
from .solver import SolverConfig, amplitude_sweep, solve_selfsimilar, uniqueness_probe, x_norm
from .head import exponents, head
from .validators import estimate_report

__all__ = [
    "AxisymField", "ConsistencyError", "Grid", "ScalarSphereField", "build_grid",
    "grad_norm_squared", "laplace_beltrami", "lp_norm", "surface_gradient",
    "ForceSpec", "make_force",
    "assemble", "green_tensor", "picard_map", "recover_pressure", "solve_stokes",
    "SolverConfig", "amplitude_sweep", "solve_selfsimilar", "uniqueness_probe", "x_norm",
    "exponents", "head", "estimate_report",
]
