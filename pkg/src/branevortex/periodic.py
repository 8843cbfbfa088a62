"""Doubly periodic multi-vortex solver.

The unknown stack w relates to the log fields by u_j = u0_j + (L w)_j.  A
solution of the transformed system exists iff every forced cell integral
K_j = |cell| - 4 pi N_j + (4 pi/(l+1)) sum_i N_i is positive (e^{u} has
positive integral); the gate below tests exactly that and reports the
per-component threshold margins alongside.

The minimized functional is

    I(w) = int [ 1/2 sum |grad w_i|^2 + sum_i e^{u0_i + (Lw)_i} - sum b_i w_i ]

whose L2 gradient is -lap(w_j) + (L^T U)_j - b_j with U_i = e^{u0_i+(Lw)_i};
it is strictly convex, so the minimizer is unique and any critical point is
the solution.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .background import BackgroundData, VortexSpec, periodic_background
from .coupling import CouplingData, build_coupling, v_from_w
from .errors import (DivergingIterateError, DomainError, ExistenceGateError,
                     NonConvergenceError)
from .grids import TorusGrid
from .newton import SolveResult, newton_minimize, raise_non_convergence

EXP_ARG_LIMIT = 700.0


@dataclass(frozen=True)
class ExistenceReport:
    admissible: bool
    threshold: float          # (l+1)|cell|/(4 pi), strict upper bound on N_j
    margins: np.ndarray       # threshold - N_j per component
    K: np.ndarray             # forced values of int e^{u_j}


def existence_condition(spec: VortexSpec) -> ExistenceReport:
    """Evaluate the sharp existence gate for a torus problem.

    Admissibility is decided by K_j > 0 for all j, which is the condition
    the minimization itself requires (it forces int e^{u_j} = K_j > 0) and
    which implies max N_j < (l+1)|cell|/(4 pi); the threshold margins are
    reported for reference.
    """
    grid = spec.domain
    if not isinstance(grid, TorusGrid):
        raise DomainError("existence_condition requires a torus domain")
    l = spec.l
    counts = spec.counts.astype(float)
    threshold = (l + 1) * grid.area / (4.0 * np.pi)
    K = grid.area - 4.0 * np.pi * counts \
        + 4.0 * np.pi * counts.sum() / (l + 1)
    admissible = bool(np.all(K > 0.0) and counts.max(initial=0.0) < threshold)
    return ExistenceReport(admissible=admissible, threshold=float(threshold),
                           margins=threshold - counts, K=K)


@dataclass(frozen=True)
class PeriodicProblem:
    spec: VortexSpec
    coupling: CouplingData
    background: BackgroundData = field(repr=False)
    a: np.ndarray
    b: np.ndarray
    K: np.ndarray
    gate: ExistenceReport

    @property
    def grid(self) -> TorusGrid:
        return self.spec.domain

    @property
    def exp_u0(self) -> np.ndarray:
        return self.background.exp_u0


def make_periodic_problem(spec: VortexSpec,
                          coupling: Optional[CouplingData] = None,
                          background: Optional[BackgroundData] = None,
                          core_scale: Optional[float] = None,
                          cutoffs: Optional[tuple] = None) -> PeriodicProblem:
    """Assemble the torus problem data; backgrounds are built on demand."""
    grid = spec.domain
    if not isinstance(grid, TorusGrid):
        raise DomainError("make_periodic_problem requires a torus domain")
    coupling = coupling or build_coupling(spec.l)
    if background is None:
        background = periodic_background(spec, core_scale=core_scale,
                                         cutoffs=cutoffs)
    gate = existence_condition(spec)
    counts = spec.counts.astype(float)
    a = (spec.l + 1) - 4.0 * np.pi * counts / grid.area
    b = coupling.L_inv @ a
    K = gate.K
    b_check = coupling.L.T @ K / grid.area
    if np.max(np.abs(b - b_check)) > 1e-12 * max(1.0, np.max(np.abs(b))):
        raise AssertionError("b and K are inconsistent; coupling data corrupt")
    for arr in (a, b):
        arr.setflags(write=False)
    return PeriodicProblem(spec=spec, coupling=coupling, background=background,
                           a=a, b=b, K=K, gate=gate)


# ---------------------------------------------------------------------------
# functional, gradient, Hessian action
# ---------------------------------------------------------------------------

def _exp_fields(problem: PeriodicProblem, w: np.ndarray) -> np.ndarray:
    v = v_from_w(problem.coupling, w)
    vmax = float(np.max(v))
    if vmax > EXP_ARG_LIMIT:
        raise DivergingIterateError(
            f"exponent {vmax:.1f} exceeds {EXP_ARG_LIMIT:g}; the iterate is "
            f"diverging -- use a smaller step")
    return problem.exp_u0 * np.exp(v)


def energy(problem: PeriodicProblem, w: np.ndarray) -> float:
    """Value of the convex functional at the field stack w."""
    grid = problem.grid
    w = np.asarray(w, dtype=float)
    U = _exp_fields(problem, w)
    quad = 0.5 * grid.grad_sq_integral(w)
    lin = float(np.sum(problem.b * np.sum(w, axis=(-2, -1)) * grid.cell_area))
    return quad + grid.integrate(np.sum(U, axis=0)) - lin


def gradient(problem: PeriodicProblem, w: np.ndarray) -> np.ndarray:
    """L2 gradient stack: -lap w_j + (L^T U)_j - b_j."""
    grid = problem.grid
    w = np.asarray(w, dtype=float)
    U = _exp_fields(problem, w)
    ltu = np.einsum("ij,i...->j...", problem.coupling.L, U)
    return -grid.laplacian(w) + ltu - problem.b[:, None, None]


def hessian_vector(problem: PeriodicProblem, w: np.ndarray,
                   s: np.ndarray) -> np.ndarray:
    """Second-variation action H s = -lap s + L^T (U * (L s))."""
    grid = problem.grid
    U = _exp_fields(problem, w)
    ls = v_from_w(problem.coupling, np.asarray(s, dtype=float))
    return -grid.laplacian(s) + np.einsum("ij,i...->j...", problem.coupling.L,
                                          U * ls)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

def _build_result(problem: PeriodicProblem, w, hist, converged) -> SolveResult:
    grid = problem.grid
    coupling = problem.coupling
    v = v_from_w(coupling, w)
    with np.errstate(divide="ignore"):
        u0_log = np.log(problem.exp_u0)
    u = u0_log + v
    exp_u = problem.exp_u0 * np.exp(v)
    U_sum = np.sum(exp_u, axis=0)
    res = grid.laplacian(v) - (exp_u + U_sum[None, :, :]
                               - problem.a[:, None, None])
    res_norms = np.sqrt(np.sum(res**2, axis=(-2, -1)) * grid.cell_area)
    g = gradient(problem, w)
    gn = float(np.sqrt(np.sum(g * g) * grid.cell_area))
    return SolveResult(w=w, v=v, u=u, exp_u=exp_u, energy=energy(problem, w),
                       grad_norm=gn,
                       residual=float(np.sqrt(np.sum(res_norms**2))),
                       residuals=res_norms,
                       iterations=int(np.count_nonzero(hist.step)),
                       converged=converged, history=hist, problem=problem,
                       mode="torus")


def minimize(problem: PeriodicProblem, w0: Optional[np.ndarray] = None,
             tol: float = 1e-10, residual_tol: float = 1e-8,
             max_outer: int = 200, force: bool = False) -> SolveResult:
    """Minimize the torus functional; raises unless the gate passes or
    ``force`` is set (useful to observe the divergent mean drift).

    A converged result satisfies both the gradient tolerance and the
    strong-form residual tolerance (scaled by (l+1) sqrt(|cell|))."""
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    gate = problem.gate
    if not gate.admissible and not force:
        bad = np.flatnonzero(gate.K <= 0.0) + 1
        raise ExistenceGateError(
            "no doubly periodic solution exists: the condition "
            "max_j N_j < (l+1)|cell|/(4 pi) with positive forced integrals "
            f"K_j fails (threshold {gate.threshold:.6g}; "
            f"K <= 0 for components {bad.tolist()}; K = "
            f"{np.array2string(gate.K, precision=6)})")
    grid = problem.grid
    l = problem.spec.l
    if w0 is None:
        w0 = np.zeros((l, grid.nx, grid.ny))
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (l, grid.nx, grid.ny):
        raise DomainError(
            f"w0 must have shape {(l, grid.nx, grid.ny)}, got {w0.shape}")

    shift = float(l + 1)
    w, hist, converged, reason = newton_minimize(
        w0,
        energy=lambda x: energy(problem, x),
        gradient=lambda x: gradient(problem, x),
        hessian_vector=lambda x, s: hessian_vector(problem, x, s),
        precond=lambda r: grid.helmholtz_inverse(r, shift),
        cell_area=grid.cell_area, tol=tol, max_outer=max_outer,
        component_means=lambda x: grid.mean(x).tolist())
    if not converged:
        raise_non_convergence(reason, hist, max_outer, tol)
    result = _build_result(problem, w, hist, converged)
    scale = (l + 1) * np.sqrt(grid.area)
    if result.residual > residual_tol * scale:
        raise NonConvergenceError(
            f"gradient converged but the strong-form residual "
            f"{result.residual:.3e} exceeds {residual_tol:g} * {scale:.3g}",
            history=hist)
    return result
