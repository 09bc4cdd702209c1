"""Shooting-method oracle for the constant-weight radial groundstate.

Independent of the finite-element path: integrates the radial ODE

    u'' + (N-1)/r u' + u**p = 0,   u'(0) = 0,

with an adaptive ODE solver, bisecting the center value u(0) until the first
zero lands on r = 1, then evaluates the quotient from quadrature accumulators
carried along the integration.  Used by the test suite to pin the radial
solver and the Sobolev-constant computation at alpha = 0.
"""

import numpy as np
from scipy.integrate import solve_ivp

from .weight import sphere_area

__all__ = ["shooting_best_constant"]

_R_START = 1e-8


def _integrate(N, p, a, r_end=1.0, dense=False):
    """Integrate from the series start at r ~ 0 with value a; stop at u = 0."""

    def rhs(r, y):
        u, du, _, _ = y
        upow = abs(u) ** (p - 1.0) * u
        return [du, -(N - 1.0) / r * du - upow, du**2 * r ** (N - 1.0),
                abs(u) ** (p + 1.0) * r ** (N - 1.0)]

    def hit_zero(r, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1.0

    u0 = a - a**p * _R_START**2 / (2.0 * N)
    du0 = -(a**p) * _R_START / N
    sol = solve_ivp(
        rhs, (_R_START, r_end), [u0, du0, 0.0, 0.0],
        rtol=1e-12, atol=1e-14, events=hit_zero, dense_output=dense, method="RK45",
    )
    return sol


def shooting_best_constant(N, p, bisect_iters=80):
    """Best constant of the unit-weight radial quotient on the unit ball.

    Bisects the center value until the profile's first zero sits at r = 1 to
    machine precision, then returns the quotient

        |S^(N-1)| * integral u'^2 r^(N-1) /
            (|S^(N-1)| * integral u^(p+1) r^(N-1)) ** (2/(p+1)).
    """
    # bracket: larger center values push the first zero inward
    lo, hi = 0.5, 2.0
    while _integrate(N, p, hi).t_events[0].size == 0:
        hi *= 2.0
        if hi > 1e8:
            raise RuntimeError("failed to bracket the shooting parameter from above")
    while _integrate(N, p, lo).t_events[0].size > 0:
        lo *= 0.5
        if lo < 1e-8:
            raise RuntimeError("failed to bracket the shooting parameter from below")

    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if _integrate(N, p, mid).t_events[0].size > 0:
            hi = mid
        else:
            lo = mid
    a = 0.5 * (lo + hi)

    sol = _integrate(N, p, a, r_end=1.0)
    energy, lp_norm = sol.y[2, -1], sol.y[3, -1]
    area = sphere_area(N)
    return (area * energy) / (area * lp_norm) ** (2.0 / (p + 1.0))
