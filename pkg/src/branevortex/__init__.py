"""Multi-component BPS vortex solver.

Computes multiple-vortex solutions of the coupled first-order system arising
from multiply intersecting branes, on a doubly periodic cell and on a
truncated plane, by direct minimization of the strictly convex transformed
functional, and verifies the checkable structure: the sharp existence
condition, forced cell integrals, flux quantization, uniqueness, symmetric
reduction and exponential decay.
"""

from .background import (BackgroundData, VortexSpec, make_vortex_spec,
                         periodic_background, planar_background)
from .coupling import CouplingData, build_coupling, v_from_w, w_from_v
from .diagnostics import (DiagnosticsReport, build_report, check_flux,
                          check_flux_refined, check_K_identity,
                          check_K_identity_refined, check_symmetric_reduction,
                          check_uniqueness, reconstruct_fields)
from .errors import (BraneVortexError, DecayUnderflowError,
                     DivergingIterateError, DomainError, ExistenceGateError,
                     NonConvergenceError, NotConvergedError, ShapeError,
                     SolvabilityError, WrongDomainError)
from .estimators import PeriodicVortexSolver, PlanarVortexSolver
from .grids import PlanarGrid, TorusGrid
from .newton import SolveResult
from .periodic import (ExistenceReport, PeriodicProblem, existence_condition,
                       make_periodic_problem)
from .planar import DecayFit, PlanarProblem, decay_rate, make_planar_problem
from .radial import radial_profile

__version__ = "0.1.0"

__all__ = [
    "BackgroundData", "BraneVortexError", "CouplingData", "DecayFit",
    "DecayUnderflowError", "DiagnosticsReport", "DivergingIterateError",
    "DomainError", "ExistenceGateError", "ExistenceReport",
    "NonConvergenceError", "NotConvergedError", "PeriodicProblem",
    "PeriodicVortexSolver", "PlanarGrid", "PlanarProblem",
    "PlanarVortexSolver", "ShapeError", "SolvabilityError", "SolveResult",
    "TorusGrid", "VortexSpec", "WrongDomainError", "build_coupling",
    "build_report", "check_K_identity", "check_K_identity_refined",
    "check_flux", "check_flux_refined", "check_symmetric_reduction",
    "check_uniqueness", "decay_rate", "existence_condition",
    "make_periodic_problem", "make_planar_problem", "make_vortex_spec",
    "periodic_background", "planar_background", "radial_profile",
    "reconstruct_fields", "v_from_w", "w_from_v",
]
