"""Independent radial profile solver used as a cross-check oracle.

When every component shares one vortex at the origin, the common log field
satisfies the scalar radial problem

    u'' + u'/r = m^2 (e^u - 1),   u(r) = 2 N ln r + a + O(r^2) near 0,
    u -> 0 as r -> infinity,

with m^2 the largest coupling eigenvalue acting as the vacuum weight.  The
free constant a is found by bisection shooting: too large sends u to +inf,
too small sends it to -inf (monotone in a).  This solver shares no code
with the 2-d minimizers, which is the point.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

_R0 = 1e-4
_BLOWUP_HI = 0.5
_BLOWUP_LO = -40.0


@dataclass
class RadialProfile:
    a: float                  # the value fixing u - 2 N ln r at the origin
    r_max: float
    mass_sq: float
    multiplicity: int
    _dense: object

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self._dense(np.clip(r, _R0, self.r_max))[0]


def _integrate(a, mass_sq, multiplicity, r_max, rtol, atol):
    n2 = 2.0 * multiplicity

    def rhs(r, y):
        u, p = y
        return (p, -p / r + mass_sq * (np.exp(min(u, 50.0)) - 1.0))

    def hit_hi(r, y):
        return y[0] - _BLOWUP_HI

    def hit_lo(r, y):
        return y[0] - _BLOWUP_LO

    hit_hi.terminal = True
    hit_lo.terminal = True
    u0 = n2 * np.log(_R0) + a - 0.25 * mass_sq * _R0**2
    p0 = n2 / _R0 - 0.5 * mass_sq * _R0
    sol = solve_ivp(rhs, (_R0, r_max), (u0, p0), method="LSODA",
                    events=(hit_hi, hit_lo), dense_output=True,
                    rtol=rtol, atol=atol)
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return (1 if sol.y[0, -1] > 0.0 else -1), sol


def radial_profile(mass_sq: float, multiplicity: int = 1, r_max: float = 16.0,
                   rtol: float = 1e-11, atol: float = 1e-13,
                   bracket=(-12.0, 12.0), bisections: int = 80) -> RadialProfile:
    """Shoot for the decaying radial profile with ``multiplicity`` zeros at
    the origin and vacuum weight ``mass_sq``."""
    lo, hi = bracket
    sign_lo, _ = _integrate(lo, mass_sq, multiplicity, r_max, rtol, atol)
    sign_hi, _ = _integrate(hi, mass_sq, multiplicity, r_max, rtol, atol)
    if not (sign_lo < 0 < sign_hi):
        raise RuntimeError(
            f"bisection bracket {bracket} does not straddle the profile "
            f"(signs {sign_lo}, {sign_hi})")
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        sign, _ = _integrate(mid, mass_sq, multiplicity, r_max, rtol, atol)
        if sign > 0:
            hi = mid
        else:
            lo = mid
    a = 0.5 * (lo + hi)
    _, sol = _integrate(a, mass_sq, multiplicity, r_max, rtol, atol)
    return RadialProfile(a=a, r_max=float(sol.t[-1]), mass_sq=mass_sq,
                         multiplicity=multiplicity, _dense=sol.sol)
