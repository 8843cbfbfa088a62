"""Background fields carrying the vortex point sources.

The unknowns solved for downstream are smooth because all delta-function
sources are absorbed into explicit background functions built here:

* planar case: u0_j = -sum_s ln(1 + mu/|x-p|^2), whose exponential
  e^{u0_j} = prod_s |x-p|^2/(|x-p|^2 + mu) is finite everywhere and vanishes
  exactly at the vortex points, with smooth source g_j = sum_s 4 mu/(mu+|x-p|^2)^2;
* periodic case: a compactly supported analytic core profile summed over
  periodic images, plus a smooth remainder from the spectral Poisson solver,
  normalized to zero mean.

Only exponentials of backgrounds are stored as primary data; the logarithm
is -infinity at vortex centers and is never needed downstream.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .grids import PlanarGrid, TorusGrid
from .smoothstep import RadialTransition


@dataclass(frozen=True)
class VortexSpec:
    """Vortex positions per component on a concrete domain.

    ``points`` holds one (N_j, 2) array per component; repeated rows encode
    multiplicities.  Torus points are stored wrapped into the fundamental
    cell; planar points must sit well inside the truncation box.
    """

    points: tuple
    domain: object

    @property
    def l(self) -> int:
        return len(self.points)

    @property
    def counts(self) -> np.ndarray:
        return np.array([len(p) for p in self.points])

    def all_points(self) -> np.ndarray:
        nonempty = [p for p in self.points if len(p)]
        return np.concatenate(nonempty) if nonempty else np.zeros((0, 2))


def make_vortex_spec(points, domain) -> VortexSpec:
    """Validate per-component vortex lists against the domain."""
    comps = []
    for j, comp in enumerate(points):
        arr = np.asarray(comp, dtype=float).reshape(-1, 2) if len(np.atleast_1d(comp)) \
            else np.zeros((0, 2))
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"component {j + 1} has non-finite vortex coordinates")
        comps.append(arr)
    if len(comps) < 2:
        raise DomainError(f"need at least 2 components, got {len(comps)}")
    if isinstance(domain, TorusGrid):
        comps = [domain.wrap(c) if len(c) else c for c in comps]
    elif isinstance(domain, PlanarGrid):
        for j, c in enumerate(comps):
            if len(c) and np.max(np.hypot(c[:, 0], c[:, 1])) >= domain.R:
                raise DomainError(
                    f"component {j + 1} has vortices outside the box of "
                    f"half-side {domain.R}")
    else:
        raise DomainError(f"unsupported domain type {type(domain).__name__}")
    for c, arr in enumerate(comps):
        comps[c] = np.ascontiguousarray(arr)
        comps[c].setflags(write=False)
    return VortexSpec(points=tuple(comps), domain=domain)


@dataclass(frozen=True)
class BackgroundData:
    """Backgrounds for all components of one problem."""

    exp_u0: np.ndarray            # (l, nx, ny), e^{u0_j}, exact zeros at centers
    u0_reg: np.ndarray            # finite part of u0_j (u0 minus the pure logs)
    g: Optional[np.ndarray]       # planar source fields, None on the torus
    mu: Optional[float]           # planar regularization scale
    core_scale: Optional[float] = None   # torus core width sqrt(mu0)
    cutoffs: Optional[tuple] = None      # torus profile support radii
    smooth_remainder: Optional[np.ndarray] = field(default=None, repr=False)
    spec: Optional[VortexSpec] = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# planar analytic pieces (shared with the planar solver's far-field blend)
# ---------------------------------------------------------------------------

def planar_exp_u0(X, Y, pts, mu: float):
    out = np.ones_like(X)
    for px, py in pts:
        r2 = (X - px) ** 2 + (Y - py) ** 2
        out = out * (r2 / (r2 + mu))
    return out


def planar_u0(X, Y, pts, mu: float):
    """u0 itself; -infinity exactly at vortex points."""
    out = np.zeros_like(X)
    with np.errstate(divide="ignore"):
        for px, py in pts:
            r2 = (X - px) ** 2 + (Y - py) ** 2
            out = out + np.log(r2 / (r2 + mu))
    return out


def planar_grad_u0(X, Y, pts, mu: float):
    """Gradient of u0; only meaningful away from the vortex points, where it
    is evaluated, and set to 0 at exact centers."""
    gx = np.zeros_like(X)
    gy = np.zeros_like(X)
    for px, py in pts:
        dx, dy = X - px, Y - py
        r2 = dx**2 + dy**2
        safe = np.where(r2 > 0.0, r2, 1.0)
        w = np.where(r2 > 0.0, 2.0 * mu / (safe * (safe + mu)), 0.0)
        gx = gx + w * dx
        gy = gy + w * dy
    return gx, gy


def planar_source(X, Y, pts, mu: float):
    out = np.zeros_like(X)
    for px, py in pts:
        r2 = (X - px) ** 2 + (Y - py) ** 2
        out = out + 4.0 * mu / (mu + r2) ** 2
    return out


def planar_background(spec: VortexSpec, mu: float) -> BackgroundData:
    """Planar backgrounds for every component at regularization scale mu."""
    if mu <= 0:
        raise DomainError(f"regularization scale mu must be positive, got {mu}")
    grid = spec.domain
    if not isinstance(grid, PlanarGrid):
        raise DomainError("planar_background requires a PlanarGrid domain")
    X, Y = grid.X, grid.Y
    exp_u0 = np.empty((spec.l, grid.nx, grid.ny))
    u0_reg = np.empty_like(exp_u0)
    g = np.empty_like(exp_u0)
    for j, pts in enumerate(spec.points):
        exp_u0[j] = planar_exp_u0(X, Y, pts, mu)
        g[j] = planar_source(X, Y, pts, mu)
        reg = np.zeros_like(X)
        for px, py in pts:
            reg -= np.log((X - px) ** 2 + (Y - py) ** 2 + mu)
        u0_reg[j] = reg
    return BackgroundData(exp_u0=exp_u0, u0_reg=u0_reg, g=g, mu=float(mu),
                          spec=spec)


# ---------------------------------------------------------------------------
# periodic construction
# ---------------------------------------------------------------------------

def _periodic_singular(grid: TorusGrid, pts, mu0: float, rho1: float, rho2: float):
    """Compactly supported per-vortex core profiles summed over images.

    Each vortex contributes sigma(rho) = eta(rho) * ln(rho^2/(rho^2+mu0))
    with eta an infinitely smooth cutoff equal to 1 inside rho1 and 0 outside
    rho2 < L/2, so the sum over the 3x3 image block is exactly periodic and
    smooth away from the centers.  Returns (exp_s, lap_reg, reg_log): the
    exponential of the profile sum, the classical (delta-free) part of its
    Laplacian, and the finite log part.
    """
    up = RadialTransition(rho1, rho2)
    X, Y = grid.X, grid.Y
    exp_s = np.ones_like(X)
    lap_reg = np.zeros_like(X)
    reg_log = np.zeros_like(X)
    offsets = [(mx, my) for mx in (-1, 0, 1) for my in (-1, 0, 1)]
    for px, py in pts:
        for mx, my in offsets:
            dx = X - (px + mx * grid.Lx)
            dy = Y - (py + my * grid.Ly)
            r2 = dx**2 + dy**2
            rho = np.sqrt(r2)
            if np.min(rho) >= rho2:
                continue
            eta = 1.0 - up(rho)
            base = r2 / (r2 + mu0)
            exp_s = exp_s * np.power(base, eta)
            lap_f = -4.0 * mu0 / (mu0 + r2) ** 2
            lap_reg += eta * lap_f
            ann = (rho > rho1) & (rho < rho2)
            if np.any(ann):
                ra = rho[ann]
                fa = np.log(ra**2 / (ra**2 + mu0))
                fpa = 2.0 * mu0 / (ra * (ra**2 + mu0))
                eta_d1 = -up.d1(ra)
                eta_lap = -up.laplacian(ra)
                upd = np.zeros_like(rho)
                upd[ann] = 2.0 * fpa * eta_d1 + fa * eta_lap
                lap_reg += upd
            reg_log += -eta * np.log(r2 + mu0)
    return exp_s, lap_reg, reg_log


def periodic_background(spec: VortexSpec, core_scale: Optional[float] = None,
                        cutoffs: Optional[tuple] = None) -> BackgroundData:
    """Periodic backgrounds: analytic cores plus a spectral smooth remainder.

    ``core_scale`` is the core regularization width sqrt(mu0), default
    min(Lx, Ly)/8; it must resolve on the grid (at least two cells).  The
    remainder solves a zero-mean Poisson problem whose right-hand side is the
    difference between the target source -4 pi N_j/|cell| and the classical
    Laplacian of the core profiles; its continuum mean vanishes identically
    and the quadrature residue is projected out, which fixes the free
    additive constant of u0_j to the zero-mean convention.
    """
    grid = spec.domain
    if not isinstance(grid, TorusGrid):
        raise DomainError("periodic_background requires a TorusGrid domain")
    lmin = min(grid.Lx, grid.Ly)
    if core_scale is None:
        core_scale = lmin / 8.0
    if core_scale < 2.0 * min(grid.hx, grid.hy):
        raise DomainError(
            f"core_scale {core_scale:g} is below two grid cells "
            f"({2.0 * min(grid.hx, grid.hy):g}); refine the grid or widen it")
    if cutoffs is None:
        cutoffs = (0.25 * lmin, 0.45 * lmin)
    rho1, rho2 = map(float, cutoffs)
    if not 0.0 < rho1 < rho2 <= 0.5 * lmin:
        raise DomainError(
            f"cutoff radii must satisfy 0 < rho1 < rho2 <= {0.5 * lmin:g}, "
            f"got ({rho1:g}, {rho2:g})")
    mu0 = float(core_scale) ** 2

    _warn_close_vortices(spec, 2.0 * min(grid.hx, grid.hy))

    exp_u0 = np.empty((spec.l, grid.nx, grid.ny))
    u0_reg = np.empty_like(exp_u0)
    smooth = np.empty_like(exp_u0)
    for j, pts in enumerate(spec.points):
        exp_s, lap_reg, reg_log = _periodic_singular(grid, pts, mu0, rho1, rho2)
        rhs = -4.0 * np.pi * len(pts) / grid.area - lap_reg
        remainder = grid.poisson_zero_mean(rhs, project=True)
        exp_u0[j] = exp_s * np.exp(remainder)
        u0_reg[j] = reg_log + remainder
        smooth[j] = remainder
    return BackgroundData(exp_u0=exp_u0, u0_reg=u0_reg, g=None, mu=None,
                          core_scale=float(core_scale), cutoffs=(rho1, rho2),
                          smooth_remainder=smooth, spec=spec)


def _warn_close_vortices(spec: VortexSpec, limit: float):
    for j, pts in enumerate(spec.points):
        if len(pts) < 2:
            continue
        d = pts[:, None, :] - pts[None, :, :]
        dist = np.hypot(d[..., 0], d[..., 1])
        iu = np.triu_indices(len(pts), k=1)
        if np.any(dist[iu] < limit):
            warnings.warn(
                f"component {j + 1} has vortices closer than two grid cells; "
                f"multiplicities are legal but local resolution may suffer",
                RuntimeWarning, stacklevel=3)
