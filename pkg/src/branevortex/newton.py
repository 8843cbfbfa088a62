"""Newton-Krylov descent for the strictly convex field functionals.

Each outer step solves the Newton system H d = -g by preconditioned
conjugate gradients (matrix-free, with a constant-coefficient Helmholtz
inverse as preconditioner) and applies an Armijo backtracking line search.
Convexity makes the line search a rarely-active safeguard; the energy
decreases monotonically by construction.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergingIterateError, NonConvergenceError

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 60
ITERATE_CAP = 1e9   # |w| beyond this counts as certified divergence


@dataclass
class IterationHistory:
    energy: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step: list = field(default_factory=list)
    mean_w: list = field(default_factory=list)

    def rows(self):
        for i, (e, g, s) in enumerate(zip(self.energy, self.grad_norm, self.step)):
            yield i, e, g, s


@dataclass
class SolveResult:
    """Converged (or capped) state of one minimization run."""

    w: np.ndarray                    # (l, nx, ny) minimizer of the functional
    v: np.ndarray                    # L w
    u: np.ndarray                    # log fields; -inf exactly at vortex centers
    exp_u: np.ndarray                # e^{u_j}, the primary reconstruction
    energy: float
    grad_norm: float
    residual: float                  # discrete L2 residual of the strong form
    residuals: np.ndarray            # per-component L2 residuals
    iterations: int
    converged: bool
    history: IterationHistory
    problem: object = field(repr=False)
    mode: str = "torus"


def _l2_norm(x: np.ndarray, cell_area: float) -> float:
    return float(np.sqrt(np.sum(x * x) * cell_area))


def _inner(a: np.ndarray, b: np.ndarray, cell_area: float) -> float:
    return float(np.sum(a * b) * cell_area)


def pcg(hess: Callable, precond: Callable, rhs: np.ndarray, cell_area: float,
        rtol: float, maxiter: int = 400) -> np.ndarray:
    """Matrix-free preconditioned CG for H x = rhs with SPD H.

    If a numerically null curvature direction is met (possible when the
    exponential weights underflow along a divergent ray), the current
    iterate -- or that direction itself -- is returned; both are descent
    directions for the outer line search.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rhs_norm = _l2_norm(rhs, cell_area)
    if rhs_norm == 0.0:
        return x
    z = precond(r)
    p = z.copy()
    rz = _inner(r, z, cell_area)
    for _ in range(maxiter):
        hp = hess(p)
        php = _inner(p, hp, cell_area)
        if php <= 1e-30 * _inner(p, p, cell_area):
            return x if np.any(x) else p
        alpha = rz / php
        x += alpha * p
        r -= alpha * hp
        if _l2_norm(r, cell_area) <= rtol * rhs_norm:
            break
        z = precond(r)
        rz_new = _inner(r, z, cell_area)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def newton_minimize(w0: np.ndarray, energy: Callable, gradient: Callable,
                    hessian_vector: Callable, precond: Callable,
                    cell_area: float, tol: float, max_outer: int = 200,
                    component_means: Optional[Callable] = None):
    """Minimize a smooth strictly convex functional of a field stack.

    Returns (w, history, converged, stop_reason).  ``component_means``, when
    given, is recorded per iteration (used to expose the divergence of the
    free means when the existence condition is violated and the run was
    forced).
    """
    w = np.array(w0, dtype=float, copy=True)
    hist = IterationHistory()
    e = energy(w)
    converged = False
    stop_reason = "max_outer"
    for _ in range(max_outer):
        g = gradient(w)
        gn = _l2_norm(g, cell_area)
        hist.energy.append(e)
        hist.grad_norm.append(gn)
        if component_means is not None:
            hist.mean_w.append(component_means(w))
        if gn <= tol:
            hist.step.append(0.0)
            converged = True
            stop_reason = "converged"
            break
        rtol = min(0.1, np.sqrt(gn))
        d = pcg(lambda s: hessian_vector(w, s), precond, -g, cell_area, rtol)
        slope = _inner(g, d, cell_area)
        if slope >= 0.0:     # fall back to the preconditioned gradient
            d = -precond(g)
            slope = _inner(g, d, cell_area)
        # near the minimum the true decrease sinks below the round-off of
        # the energy value itself; allow comparisons up to that noise floor
        noise = 8.0 * np.finfo(float).eps * max(1.0, abs(e))
        t = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            try:
                e_trial = energy(w + t * d)
            except DivergingIterateError:
                t *= 0.5
                continue
            if e_trial <= e + ARMIJO_C * t * slope + noise \
                    or not np.isfinite(e_trial):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stop_reason = "line_search_stalled"
            hist.step.append(0.0)
            break
        w += t * d
        e = e_trial
        hist.step.append(t)
        if not np.isfinite(e) or np.max(np.abs(w)) > ITERATE_CAP:
            stop_reason = "diverged"
            hist.energy.append(e)
            try:
                gn = _l2_norm(gradient(w), cell_area)
            except (DivergingIterateError, FloatingPointError):
                gn = float("inf")
            hist.grad_norm.append(gn)
            hist.step.append(0.0)
            if component_means is not None:
                hist.mean_w.append(component_means(w))
            break
    else:
        # cap reached; record the final state for inspection
        g = gradient(w)
        gn = _l2_norm(g, cell_area)
        hist.energy.append(e)
        hist.grad_norm.append(gn)
        hist.step.append(0.0)
        if component_means is not None:
            hist.mean_w.append(component_means(w))
        if gn <= tol:
            converged = True
            stop_reason = "converged"
    return w, hist, converged, stop_reason


def raise_non_convergence(stop_reason: str, history: IterationHistory,
                          max_outer: int, tol: float):
    msg = {
        "max_outer": f"no convergence to gradient tolerance {tol:g} within "
                     f"{max_outer} outer iterations",
        "diverged": "iterates diverged (unbounded descent direction); the "
                    "existence condition is likely violated",
        "line_search_stalled": "line search stalled before reaching the "
                               "gradient tolerance",
    }[stop_reason]
    raise NonConvergenceError(msg, history=history)
