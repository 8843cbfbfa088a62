"""Uniform grids with spectral differential operators and quadrature.

Two geometries are supported:

* :class:`TorusGrid` -- a doubly periodic rectangular cell with nodes at
  (i*Lx/nx, j*Ly/ny); operators use the FFT.
* :class:`PlanarGrid` -- the square box [-R, R]^2 with cell-centered nodes
  and homogeneous Dirichlet behaviour encoded by sine transforms.

Fields are plain float arrays of shape (nx, ny) indexed [ix, iy] (or stacks
with extra leading axes); grid objects carry all geometry metadata.  All
operations are pure: inputs are never modified.
"""

import numpy as np
from scipy import fft as sfft

from .errors import DomainError, SolvabilityError


def _as_fields(f):
    f = np.asarray(f, dtype=float)
    if f.ndim < 2:
        raise ValueError(f"expected a 2-d field or a field stack, got shape {f.shape}")
    return f


class TorusGrid:
    """Doubly periodic cell of side lengths Lx, Ly sampled on nx x ny nodes."""

    periodic = True

    def __init__(self, Lx: float, Ly: float, nx: int, ny: int):
        if Lx <= 0 or Ly <= 0:
            raise DomainError(f"cell sides must be positive, got {Lx}, {Ly}")
        if nx < 8 or ny < 8:
            raise DomainError(f"need at least 8 nodes per direction, got {nx}, {ny}")
        self.Lx, self.Ly = float(Lx), float(Ly)
        self.nx, self.ny = int(nx), int(ny)
        self.hx = self.Lx / self.nx
        self.hy = self.Ly / self.ny
        self.area = self.Lx * self.Ly
        self.cell_area = self.hx * self.hy
        self.x = np.arange(self.nx) * self.hx
        self.y = np.arange(self.ny) * self.hy
        self.X, self.Y = np.meshgrid(self.x, self.y, indexing="ij")
        kx = 2.0 * np.pi * sfft.fftfreq(self.nx, d=self.hx)
        ky = 2.0 * np.pi * sfft.rfftfreq(self.ny, d=self.hy)
        self.k2 = kx[:, None] ** 2 + ky[None, :] ** 2

    # -- quadrature ------------------------------------------------------
    def integrate(self, f) -> float:
        """Midpoint (= trapezoidal) quadrature; spectrally accurate for
        smooth periodic integrands."""
        f = _as_fields(f)
        return float(np.sum(f[..., :, :])) * self.cell_area if f.ndim == 2 \
            else np.sum(f, axis=(-2, -1)) * self.cell_area

    def mean(self, f):
        f = _as_fields(f)
        return np.mean(f, axis=(-2, -1))

    # -- spectral operators ---------------------------------------------
    def laplacian(self, f):
        f = _as_fields(f)
        return sfft.irfft2(-self.k2 * sfft.rfft2(f, axes=(-2, -1)),
                           s=(self.nx, self.ny), axes=(-2, -1))

    def poisson_zero_mean(self, rhs, project: bool = False):
        """Solve laplacian(f) = rhs for the unique zero-mean f.

        The torus demands a zero-mean right-hand side; violations raise
        :class:`SolvabilityError` unless ``project`` is set, in which case
        the mean is removed first (used internally where the continuum
        charge balance is exact but quadrature leaves a residue).
        """
        rhs = _as_fields(rhs)
        m = float(np.max(np.abs(self.mean(rhs))))
        scale = float(np.max(np.abs(rhs))) if rhs.size else 0.0
        if not project and m > 1e-10 * max(scale, 1e-300):
            raise SolvabilityError(
                f"right-hand side has nonzero mean {m:.3e} "
                f"(max magnitude {scale:.3e}); not solvable on the torus")
        rh = sfft.rfft2(rhs, axes=(-2, -1))
        k2 = self.k2.copy()
        k2[0, 0] = 1.0
        fh = rh / (-k2)
        fh[..., 0, 0] = 0.0
        return sfft.irfft2(fh, s=(self.nx, self.ny), axes=(-2, -1))

    def helmholtz_inverse(self, f, shift: float):
        """Apply (-laplacian + shift)^-1; the solver preconditioner."""
        f = _as_fields(f)
        fh = sfft.rfft2(f, axes=(-2, -1)) / (self.k2 + shift)
        return sfft.irfft2(fh, s=(self.nx, self.ny), axes=(-2, -1))

    def grad_sq_integral(self, f) -> float:
        """Integral of |grad f|^2 over the cell, summed over any stack axes,
        via integration by parts (exact for the trigonometric interpolant)."""
        f = _as_fields(f)
        return -float(np.sum(f * self.laplacian(f))) * self.cell_area

    # -- geometry helpers -------------------------------------------------
    def wrap(self, points):
        """Map points into the fundamental cell [0,Lx) x [0,Ly)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2).copy()
        pts[:, 0] %= self.Lx
        pts[:, 1] %= self.Ly
        return pts

    def min_image_dist2(self, px: float, py: float):
        """Squared distance to the nearest periodic image of (px, py)."""
        dx = np.abs(self.X - px)
        dy = np.abs(self.Y - py)
        dx = np.minimum(dx, self.Lx - dx)
        dy = np.minimum(dy, self.Ly - dy)
        return dx**2 + dy**2

    def fourier_interpolate(self, f, factor: int = 2):
        """Resample a field (stack) on a ``factor`` x finer grid by
        zero-padding its spectrum; exact for band-limited data."""
        f = _as_fields(f)
        fh = sfft.fft2(f, axes=(-2, -1))
        nx, ny = self.nx, self.ny
        fnx, fny = factor * nx, factor * ny
        out = np.zeros(f.shape[:-2] + (fnx, fny), dtype=complex)
        ix = sfft.fftfreq(nx, d=1.0 / nx).astype(int)
        iy = sfft.fftfreq(ny, d=1.0 / ny).astype(int)
        out[..., ix[:, None], iy[None, :]] = fh
        # split the Nyquist rows/columns to keep the interpolant real
        if nx % 2 == 0:
            m = nx // 2
            out[..., m, :] *= 0.5
            out[..., -m, :] = out[..., m, :]
        if ny % 2 == 0:
            m = ny // 2
            out[..., :, m] *= 0.5
            out[..., :, -m] = out[..., :, m]
        vals = sfft.ifft2(out, axes=(-2, -1)).real * (factor * factor)
        return vals

    def refined(self, factor: int = 2) -> "TorusGrid":
        return TorusGrid(self.Lx, self.Ly, factor * self.nx, factor * self.ny)

    def __repr__(self):
        return (f"TorusGrid(Lx={self.Lx:g}, Ly={self.Ly:g}, "
                f"nx={self.nx}, ny={self.ny})")


class PlanarGrid:
    """Square truncation box [-R, R]^2, cell-centered nodes, Dirichlet
    spectral operators built on the type-II discrete sine transform."""

    periodic = False

    def __init__(self, R: float, nx: int, ny: int):
        if R <= 0:
            raise DomainError(f"box half-side must be positive, got {R}")
        if nx < 8 or ny < 8:
            raise DomainError(f"need at least 8 nodes per direction, got {nx}, {ny}")
        self.R = float(R)
        self.nx, self.ny = int(nx), int(ny)
        self.Lx = self.Ly = 2.0 * self.R
        self.hx = self.Lx / self.nx
        self.hy = self.Ly / self.ny
        self.area = self.Lx * self.Ly
        self.cell_area = self.hx * self.hy
        self.x = -self.R + (np.arange(self.nx) + 0.5) * self.hx
        self.y = -self.R + (np.arange(self.ny) + 0.5) * self.hy
        self.X, self.Y = np.meshgrid(self.x, self.y, indexing="ij")
        self.rad = np.hypot(self.X, self.Y)
        kx = np.pi * np.arange(1, self.nx + 1) / self.Lx
        ky = np.pi * np.arange(1, self.ny + 1) / self.Ly
        self.lam = kx[:, None] ** 2 + ky[None, :] ** 2  # -laplacian eigenvalues

    # -- quadrature ------------------------------------------------------
    def integrate(self, f) -> float:
        f = _as_fields(f)
        return float(np.sum(f)) * self.cell_area if f.ndim == 2 \
            else np.sum(f, axis=(-2, -1)) * self.cell_area

    # -- sine-spectral operators ------------------------------------------
    def _dst(self, f):
        return sfft.dstn(f, type=2, axes=(-2, -1), norm="ortho")

    def _idst(self, fh):
        return sfft.idstn(fh, type=2, axes=(-2, -1), norm="ortho")

    def laplacian(self, f):
        """Dirichlet Laplacian: exact on the sine interpolant, which
        vanishes at the box edge."""
        return self._idst(-self.lam * self._dst(_as_fields(f)))

    def helmholtz_inverse(self, f, shift: float):
        return self._idst(self._dst(_as_fields(f)) / (self.lam + shift))

    def grad_sq_integral(self, f) -> float:
        f = _as_fields(f)
        fh = self._dst(f)
        return float(np.sum(self.lam * fh**2)) * self.cell_area

    def deriv(self, f, axis: int):
        """Spectral partial derivative along grid axis 0 (x) or 1 (y).

        The sine series differentiates into a cosine series; the top mode's
        cosine samples vanish identically at cell centers and is dropped.
        """
        f = _as_fields(f)
        ax = f.ndim - 2 + axis
        n = f.shape[ax]
        length = 2.0 * self.R
        coeff = sfft.dst(f, type=2, axis=ax, norm=None)  # 2*sum f sin(...)
        k = np.arange(1, n + 1)
        kappa = np.pi * k / length
        shape = [1] * f.ndim
        shape[ax] = n
        amp = coeff / n * kappa.reshape(shape)  # k = n term multiplies zeros
        z = np.zeros_like(f)
        sl_dst, sl_dct = [slice(None)] * f.ndim, [slice(None)] * f.ndim
        sl_dst[ax] = slice(0, n - 1)
        sl_dct[ax] = slice(1, n)
        z[tuple(sl_dct)] = 0.5 * amp[tuple(sl_dst)]
        return sfft.dct(z, type=3, axis=ax, norm=None)

    def __repr__(self):
        return f"PlanarGrid(R={self.R:g}, nx={self.nx}, ny={self.ny})"
