"""Finite-volume solver built around time-expanded flux vector splitting.

One interface flux evaluation carries the scheme to high order in both
space and time; a WENO + TVD-RK3 finite-volume baseline shares the same
reconstruction machinery for accuracy and cost comparisons.
"""

from .driver import SCHEME_NAMES, SchemeConfig, run_to_time
from .errors import ConfigError, DegenerateEigensystem, NonPhysicalState, StepRejected
from .mesh import BoundaryCondition, GridField, GridSpec, boundary_set, cfl_dt, fill_ghosts
from .physics import (
    EosParams,
    Euler1D,
    Euler2D,
    LinearAdvection,
    PrimitiveVector,
    SplitJacobian,
    build_split_jacobian,
    physical_flux,
    primitive_from_conserved,
    steger_warming_flux_pair,
)
from .problems import PROBLEMS, generate_reference, init_cell_averages

__version__ = "0.1.0"

__all__ = [
    "SCHEME_NAMES",
    "SchemeConfig",
    "run_to_time",
    "ConfigError",
    "DegenerateEigensystem",
    "NonPhysicalState",
    "StepRejected",
    "BoundaryCondition",
    "GridField",
    "GridSpec",
    "boundary_set",
    "cfl_dt",
    "fill_ghosts",
    "EosParams",
    "Euler1D",
    "Euler2D",
    "LinearAdvection",
    "PrimitiveVector",
    "SplitJacobian",
    "build_split_jacobian",
    "physical_flux",
    "primitive_from_conserved",
    "steger_warming_flux_pair",
    "PROBLEMS",
    "generate_reference",
    "init_cell_averages",
    "__version__",
]
