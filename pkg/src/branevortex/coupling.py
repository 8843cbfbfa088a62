"""Closed-form linear algebra for the inter-component coupling matrix.

The l components couple through the matrix A = I + ones (2 on the diagonal,
1 elsewhere).  Its Cholesky factor, inverse factor, inverse and eigenvalues
all have closed forms, which are evaluated directly here; no iterative
factorization is ever run, so tests against a numerical factorization stay
meaningful.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class CouplingData:
    """Coupling matrix of an l-component problem with its exact factors.

    All arrays are read-only; ``eigenvalues`` is sorted ascending, i.e.
    ``[1, ..., 1, l+1]``.
    """

    l: int
    A: np.ndarray
    L: np.ndarray
    L_inv: np.ndarray
    A_inv: np.ndarray
    eigenvalues: np.ndarray


def build_coupling(l: int) -> CouplingData:
    """Assemble CouplingData for ``l`` components from the closed forms.

    L has diagonal sqrt((k+1)/k) and below-diagonal entries
    sqrt(1/(k(k+1))) depending only on the column k; L^-1 has diagonal
    sqrt(k/(k+1)) and below-diagonal entries -sqrt(1/(j(j+1))) depending
    only on the row j (indices 1-based).
    """
    if not isinstance(l, (int, np.integer)) or isinstance(l, bool):
        raise DomainError(f"component count must be an integer, got {l!r}")
    if l < 2:
        raise DomainError(f"component count must be at least 2, got {l}")
    l = int(l)

    k = np.arange(1, l + 1, dtype=float)
    L = np.tril(np.tile(np.sqrt(1.0 / (k * (k + 1.0))), (l, 1)), -1)
    np.fill_diagonal(L, np.sqrt((k + 1.0) / k))

    L_inv = np.tril(np.tile(-np.sqrt(1.0 / (k * (k + 1.0)))[:, None], (1, l)), -1)
    np.fill_diagonal(L_inv, np.sqrt(k / (k + 1.0)))

    A = np.eye(l) + np.ones((l, l))
    A_inv = ((l + 1.0) * np.eye(l) - np.ones((l, l))) / (l + 1.0)
    eigenvalues = np.concatenate([np.ones(l - 1), [l + 1.0]])

    for arr in (A, L, L_inv, A_inv, eigenvalues):
        arr.setflags(write=False)
    return CouplingData(l=l, A=A, L=L, L_inv=L_inv, A_inv=A_inv,
                        eigenvalues=eigenvalues)


def _check_components(coupling: CouplingData, stack: np.ndarray) -> np.ndarray:
    stack = np.asarray(stack, dtype=float)
    if stack.ndim == 0 or stack.shape[0] != coupling.l:
        raise ShapeError(
            f"expected {coupling.l} components along the first axis, "
            f"got shape {stack.shape}")
    return stack


def v_from_w(coupling: CouplingData, w: np.ndarray) -> np.ndarray:
    """Apply v = L w componentwise; works on vectors and on field stacks
    of shape (l, nx, ny) alike."""
    w = _check_components(coupling, w)
    return np.einsum("ij,j...->i...", coupling.L, w)


def w_from_v(coupling: CouplingData, v: np.ndarray) -> np.ndarray:
    """Apply w = L^-1 v, the inverse of :func:`v_from_w`."""
    v = _check_components(coupling, v)
    return np.einsum("ij,j...->i...", coupling.L_inv, v)
