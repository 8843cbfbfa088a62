"""Infinitely smooth radial transition profiles.

The background splitting and the planar far-field blend both need a cutoff
that is exactly 0 on one side, exactly 1 on the other, and C-infinity in
between, so that spectral solvers see no derivative jumps.  The transition
is the classic exp(-1/t) blend, written as a logistic of
psi(t) = 1/(1-t) - 1/t; first and second derivatives are carried along
analytically because they enter source terms.
"""

import numpy as np

_PSI_CLIP = 500.0


def _logistic_parts(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    ts = np.where(inside, t, 0.5)
    psi = 1.0 / (1.0 - ts) - 1.0 / ts
    psi = np.clip(psi, -_PSI_CLIP, _PSI_CLIP)
    sig = 1.0 / (1.0 + np.exp(-psi))
    dpsi = 1.0 / (1.0 - ts) ** 2 + 1.0 / ts**2
    d2psi = 2.0 / (1.0 - ts) ** 3 - 2.0 / ts**3
    return inside, t, sig, dpsi, d2psi


def step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    inside, t, sig, _, _ = _logistic_parts(t)
    return np.where(inside, sig, np.where(t <= 0.0, 0.0, 1.0))


def step_d1(t):
    """First derivative of :func:`step` (vanishes outside (0, 1))."""
    inside, _, sig, dpsi, _ = _logistic_parts(t)
    return np.where(inside, sig * (1.0 - sig) * dpsi, 0.0)


def step_d2(t):
    """Second derivative of :func:`step`."""
    inside, _, sig, dpsi, d2psi = _logistic_parts(t)
    val = sig * (1.0 - sig) * ((1.0 - 2.0 * sig) * dpsi**2 + d2psi)
    return np.where(inside, val, 0.0)


class RadialTransition:
    """Radial profile rising smoothly from 0 at ``r_lo`` to 1 at ``r_hi``.

    ``__call__``, ``d1`` and ``d2`` evaluate the profile and its radial
    derivatives; ``laplacian`` returns chi'' + chi'/r for radius arrays.
    """

    def __init__(self, r_lo: float, r_hi: float):
        if not r_lo < r_hi:
            raise ValueError(f"need r_lo < r_hi, got {r_lo} >= {r_hi}")
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        self._scale = 1.0 / (self.r_hi - self.r_lo)

    def _t(self, r):
        return (np.asarray(r, dtype=float) - self.r_lo) * self._scale

    def __call__(self, r):
        return step(self._t(r))

    def d1(self, r):
        return step_d1(self._t(r)) * self._scale

    def d2(self, r):
        return step_d2(self._t(r)) * self._scale**2

    def laplacian(self, r):
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0.0, r, 1.0)
        return self.d2(r) + self.d1(r) / safe
