"""Problem definition: one instance of the weighted groundstate problem.

A problem instance is the tuple (N, p, R, alpha): space dimension, superlinear
exponent, shell radius of the weight's zero set, and weight power.  Validation
lives here so that solvers and the CLI share one set of error messages.
"""

import math
from dataclasses import dataclass, replace

__all__ = [
    "ProblemParams",
    "check_dimension",
    "check_exponent",
    "check_unit_interval",
    "critical_exponent",
]


def check_dimension(N):
    """Space dimension must be an integer >= 1 (the binomial closed forms rely on it)."""
    if isinstance(N, bool) or not isinstance(N, (int,)) or N < 1:
        raise ValueError(f"dimension N must be an integer >= 1, got {N!r}")
    return int(N)


def critical_exponent(N):
    """Sobolev-critical exponent (N+2)/(N-2) for N >= 3, +inf for N = 1, 2."""
    check_dimension(N)
    if N <= 2:
        return math.inf
    return (N + 2.0) / (N - 2.0)


def check_exponent(N, p, allow_linear=False):
    """Validate the nonlinearity exponent p.

    The variational problem needs p > 1 and, for N >= 3, Sobolev-subcritical
    p < (N+2)/(N-2).  The weighted eigenvalue problem uses p = 1, admitted
    only when ``allow_linear`` is set.
    """
    lo = 1.0 if allow_linear else 1.0 + 0.0
    if allow_linear:
        if p < 1.0:
            raise ValueError(f"exponent p must satisfy p >= 1, got {p!r}")
    elif not p > 1.0:
        raise ValueError(f"exponent p must satisfy p > 1, got {p!r}")
    p_crit = critical_exponent(N)
    if not p < p_crit:
        raise ValueError(
            f"exponent p must be Sobolev-subcritical: p < {p_crit} for N = {N}, got {p!r}"
        )
    return float(p)


def check_unit_interval(name, x, open_left=False, open_right=False):
    lo_ok = x > 0 if open_left else x >= 0
    hi_ok = x < 1 if open_right else x <= 1
    if not (lo_ok and hi_ok):
        lo, hi = ("(" if open_left else "["), (")" if open_right else "]")
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {x!r}")
    return float(x)


@dataclass(frozen=True)
class ProblemParams:
    """Parameters (N, p, R, alpha) of one groundstate problem on the unit ball.

    R = 0 gives the pure power weight |x|**alpha, R = 1 the boundary-vanishing
    weight (1-|x|)**alpha, and R in (0,1) the two-sided weight with a spherical
    shell of zeroes at |x| = R.  p = 1 is accepted (the instance then defines a
    weighted eigenvalue problem); the quotient minimizers require p > 1.
    """

    N: int
    p: float
    R: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "N", check_dimension(self.N))
        object.__setattr__(self, "p", check_exponent(self.N, self.p, allow_linear=True))
        object.__setattr__(self, "R", check_unit_interval("shell radius R", self.R))
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def is_eigenproblem(self):
        """True when p = 1, where the quotient degenerates to a Rayleigh quotient."""
        return self.p == 1.0

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)

    def with_R(self, R):
        return replace(self, R=R)
