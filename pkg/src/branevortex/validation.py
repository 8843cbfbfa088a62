"""Input validation helpers shared by the estimators and the CLI."""

import numbers

import numpy as np

from .errors import DomainError, ShapeError


def check_component_points(X):
    """Coerce per-component vortex lists into float arrays of shape (N_j, 2).

    Accepts a sequence with one entry per component, each an array-like of
    [x, y] pairs (possibly empty).  Returns a list of ndarray copies.
    """
    if isinstance(X, np.ndarray) and X.ndim == 2 and X.shape[1] == 2:
        raise ShapeError(
            "pass one point list per component (a sequence of (N_j, 2) "
            "arrays), not a single flat point array")
    try:
        items = list(X)
    except TypeError as exc:
        raise ShapeError(f"expected a sequence of point lists, got {X!r}") \
            from exc
    out = []
    for j, comp in enumerate(items):
        arr = np.asarray(comp, dtype=float)
        if arr.size == 0:
            out.append(np.zeros((0, 2)))
            continue
        if arr.ndim == 1 and arr.size == 2:
            arr = arr.reshape(1, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ShapeError(
                f"component {j + 1}: points must form an (N, 2) array of "
                f"[x, y] pairs, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"component {j + 1}: non-finite coordinates")
        out.append(arr.copy())
    if len(out) < 2:
        raise ShapeError(f"need at least 2 components, got {len(out)}")
    return out


def check_positive(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) \
            or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, "
                          f"got {value!r}")
    return float(value)


def check_grid_points(name: str, value) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) \
            or value < 8:
        raise DomainError(f"{name} must be an integer >= 8, got {value!r}")
    return int(value)


def check_field_stack(w, l: int, nx: int, ny: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (l, nx, ny):
        raise ShapeError(f"expected field stack of shape {(l, nx, ny)}, "
                         f"got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise DomainError("field stack contains non-finite values")
    return w
