"""Estimator-style front ends for the two solvers.

Both classes follow the scikit-learn conventions: constructor arguments are
stored verbatim and retrievable through ``get_params``/``set_params``;
``fit(X)`` takes the per-component vortex lists, solves, and exposes the
outcome through trailing-underscore attributes; the instances therefore
compose with the usual ecosystem tooling (cloning, parameter sweeps).
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import diagnostics as diag
from .background import make_vortex_spec
from .grids import PlanarGrid, TorusGrid
from .periodic import existence_condition, make_periodic_problem, minimize
from .planar import decay_rate, make_planar_problem, planar_minimize
from .validation import (check_component_points, check_grid_points,
                         check_positive)

TWO_PI = 2.0 * np.pi


class _VortexSolverBase(BaseEstimator):
    def _store_common(self, result):
        self.result_ = result
        self.problem_ = result.problem
        self.w_ = result.w
        self.v_ = result.v
        self.u_ = result.u
        self.exp_u_ = result.exp_u
        self.energy_ = result.energy
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        self.residual_ = result.residual
        self.flux_ = diag.check_flux(result)
        self.flux_expected_ = diag.flux_expected(result)
        return self

    def report(self, **kwargs):
        """Diagnostics report for the fitted solution; see
        :func:`branevortex.diagnostics.build_report`."""
        check_is_fitted(self, "result_")
        return diag.build_report(self.result_, **kwargs)


class PeriodicVortexSolver(_VortexSolverBase):
    """Doubly periodic multi-vortex solver with estimator semantics.

    Parameters
    ----------
    Lx, Ly : float
        Cell side lengths.
    nx, ny : int
        Grid points per direction (powers of two recommended).
    tol : float
        Gradient L2-norm at which the Newton iteration stops.
    max_outer : int
        Outer iteration cap.
    core_scale : float or None
        Width of the analytic vortex cores in the background splitting;
        defaults to min(Lx, Ly)/8.
    force : bool
        Run even when the existence gate fails (the iteration then
        diverges; used to observe that behaviour).

    Attributes
    ----------
    u_, exp_u_, w_, v_ : ndarray stacks of the solution fields.
    flux_ : ndarray, total flux per component (expected: 4 pi N_j).
    K_ : ndarray, forced cell integrals of e^{u_j}.
    gate_ : ExistenceReport for the fitted vortex configuration.
    """

    def __init__(self, Lx=TWO_PI, Ly=TWO_PI, nx=128, ny=None, tol=1e-10,
                 max_outer=200, core_scale=None, force=False):
        self.Lx = Lx
        self.Ly = Ly
        self.nx = nx
        self.ny = ny
        self.tol = tol
        self.max_outer = max_outer
        self.core_scale = core_scale
        self.force = force

    def _grid(self):
        nx = check_grid_points("nx", self.nx)
        ny = nx if self.ny is None else check_grid_points("ny", self.ny)
        return TorusGrid(check_positive("Lx", self.Lx),
                         check_positive("Ly", self.Ly), nx, ny)

    def gate(self, X):
        """Existence gate for vortex lists X without solving."""
        spec = make_vortex_spec(check_component_points(X), self._grid())
        return existence_condition(spec)

    def fit(self, X, y=None):
        """Solve for the vortex configuration X (one point list per
        component); returns self."""
        spec = make_vortex_spec(check_component_points(X), self._grid())
        problem = make_periodic_problem(spec, core_scale=self.core_scale)
        result = minimize(problem, tol=self.tol, max_outer=self.max_outer,
                          force=self.force)
        self._store_common(result)
        self.gate_ = problem.gate
        self.K_ = problem.K
        self.K_residuals_ = diag.check_K_identity(result)
        return self


class PlanarVortexSolver(_VortexSolverBase):
    """Truncated-plane multi-vortex solver with estimator semantics.

    Parameters
    ----------
    R : float
        Half-side of the computational box [-R, R]^2.
    nx, ny : int
        Grid points per direction.
    mu : float
        Background regularization scale; automatically doubled until the
        reduced source A^-1 g stays below 1/2.
    blend : (float, float) or None
        Radii over which the background is faded into vacuum near the box
        edge; defaults to (outermost vortex + 2, R - 2).
    tol, max_outer : solver controls as in the periodic case.

    Attributes
    ----------
    u_, exp_u_, w_, v_, flux_ : as in the periodic solver.
    mu_ : float, the regularization scale actually used.
    """

    def __init__(self, R=20.0, nx=256, ny=None, mu=1.0, blend=None,
                 tol=1e-10, max_outer=200):
        self.R = R
        self.nx = nx
        self.ny = ny
        self.mu = mu
        self.blend = blend
        self.tol = tol
        self.max_outer = max_outer

    def _grid(self):
        nx = check_grid_points("nx", self.nx)
        ny = nx if self.ny is None else check_grid_points("ny", self.ny)
        return PlanarGrid(check_positive("R", self.R), nx, ny)

    def fit(self, X, y=None):
        spec = make_vortex_spec(check_component_points(X), self._grid())
        problem = make_planar_problem(spec, mu=check_positive("mu", self.mu),
                                      blend=self.blend)
        result = planar_minimize(problem, tol=self.tol,
                                 max_outer=self.max_outer)
        self._store_common(result)
        self.mu_ = problem.mu
        return self

    def decay(self, window=(6.0, 12.0)):
        """Exponential tail fit of the fitted solution over an annulus."""
        check_is_fitted(self, "result_")
        return decay_rate(self.result_, window=window)
