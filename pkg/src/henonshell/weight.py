"""The shell weight, its exact integrals, and the closed-form growth constants.

The weight on the unit ball is, with shell radius R in (0,1),

    V(r) = (1 - r/R)**alpha          for 0 <= r < R,
    V(r) = (1 - (1-r)/(1-R))**alpha  for R <= r <= 1,

degenerating to r**alpha at R = 0 and (1-r)**alpha at R = 1.  Everything here
is closed form; the solvers consume these values, and the test suite checks
them against adaptive quadrature.

Powers base**alpha with base in (0,1) and large alpha are evaluated in log
space and flushed to exactly 0 below the double-precision underflow line, so
alpha up to 1e4 is safe.
"""

import math
from dataclasses import dataclass

import numpy as np

from .params import ProblemParams, check_dimension, check_exponent
from .special import gamma_ratio, log_gamma, power_log_sup

__all__ = [
    "GrowthConstants",
    "SingularDerivativeError",
    "breaking_condition",
    "breaking_radius",
    "flux_lower_const_2d",
    "growth_constants",
    "inner_shell_moment",
    "shell_weight",
    "shell_weight_derivative",
    "shell_weight_integral",
    "sobolev_constant_lower_bound",
    "sphere_area",
]

_LOG_SWITCH = 50.0  # powers with exponents beyond this go through log space
_UNDERFLOW_LOG = -745.0


class SingularDerivativeError(ValueError):
    """Raised when the weight derivative is requested exactly at the shell kink.

    For alpha = 1 the one-sided slopes are finite but unequal; they are carried
    in ``one_sided`` so callers can still report them.
    """

    def __init__(self, message, one_sided=None):
        super().__init__(message)
        self.one_sided = one_sided


def sphere_area(N):
    """Surface measure of the unit sphere in R**N: 2 pi**(N/2) / Gamma(N/2)."""
    N = check_dimension(N)
    return 2.0 * math.pi ** (N / 2.0) / math.exp(log_gamma(N / 2.0))


def _stable_power(base, alpha):
    """base**alpha for base in [0,1], elementwise, safe for large alpha."""
    base = np.asarray(base, dtype=float)
    if alpha == 0.0:
        return np.ones_like(base)
    out = np.zeros_like(base)
    pos = base > 0.0
    if alpha <= _LOG_SWITCH:
        out[pos] = base[pos] ** alpha
    else:
        logv = alpha * np.log(base[pos])
        vals = np.zeros_like(logv)
        live = logv > _UNDERFLOW_LOG
        vals[live] = np.exp(logv[live])
        out[pos] = vals
    return out


def shell_weight(params: ProblemParams, r):
    """Weight V(r) at radius r (scalar or array), total on [0, 1]."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    R, alpha = params.R, params.alpha
    if R == 0.0:
        out = _stable_power(r, alpha)
    elif R == 1.0:
        out = _stable_power(1.0 - r, alpha)
    else:
        out = np.empty_like(r)
        inner = r < R
        out[inner] = _stable_power(1.0 - r[inner] / R, alpha)
        out[~inner] = _stable_power(1.0 - (1.0 - r[~inner]) / (1.0 - R), alpha)
    return float(out[0]) if scalar else out


def shell_weight_derivative(params: ProblemParams, r):
    """dV/dr at radius r, scalar only.

    V is smooth away from the shell; at r = R it is differentiable (with value
    0) only for alpha > 1.  For alpha <= 1 a SingularDerivativeError is raised;
    when alpha = 1 the error carries the one-sided slopes (-1/R, 1/(1-R)).
    """
    r = float(r)
    R, alpha = params.R, params.alpha
    if 0.0 < R < 1.0 and r == R:
        if alpha > 1.0:
            return 0.0
        one_sided = (-1.0 / R, 1.0 / (1.0 - R)) if alpha == 1.0 else None
        raise SingularDerivativeError(
            f"V is not differentiable at the shell r = R = {R} for alpha = {alpha}",
            one_sided=one_sided,
        )
    if R == 0.0:
        return alpha * float(_stable_power(r, alpha - 1.0)) if alpha != 0.0 else 0.0
    if R == 1.0:
        return -alpha * float(_stable_power(1.0 - r, alpha - 1.0)) if alpha != 0.0 else 0.0
    if alpha == 0.0:
        return 0.0
    if r < R:
        return -(alpha / R) * float(_stable_power(1.0 - r / R, alpha - 1.0))
    return (alpha / (1.0 - R)) * float(_stable_power(1.0 - (1.0 - r) / (1.0 - R), alpha - 1.0))


def radial_weight_derivative_times_r(params: ProblemParams, r):
    """r * dV/dr evaluated elementwise, with the removable r = 0 limit taken.

    This is the combination the scaling identity integrates; for R = 0 it
    equals alpha * r**alpha, finite down to r = 0 for every alpha > 0.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    R, alpha = params.R, params.alpha
    out = np.zeros_like(r)
    if alpha == 0.0:
        return float(out[0]) if scalar else out
    if R == 0.0:
        out = alpha * _stable_power(r, alpha)
    elif R == 1.0:
        out = -alpha * r * _stable_power(1.0 - r, alpha - 1.0)
    else:
        inner = r < R
        out[inner] = -(alpha / R) * r[inner] * _stable_power(1.0 - r[inner] / R, alpha - 1.0)
        outer = r > R
        out[outer] = (alpha / (1.0 - R)) * r[outer] * _stable_power(
            1.0 - (1.0 - r[outer]) / (1.0 - R), alpha - 1.0
        )
        at_shell = r == R
        if np.any(at_shell):
            if alpha < 1.0:
                raise SingularDerivativeError(
                    f"V' is singular at the shell r = R = {R} for alpha = {alpha}"
                )
            out[at_shell] = 0.0 if alpha > 1.0 else np.nan
    return float(out[0]) if scalar else out


def shell_weight_integral(params: ProblemParams):
    """Exact integral of V(|x|) over the unit ball in R**N.

    Substituting s = 1 - r/R on the inner piece and s = 1 - (1-r)/(1-R) on the
    outer one, then expanding r**(N-1) binomially, gives

        |S^(N-1)| * [ R**N B(alpha+1, N)
                      + sum_k C(N-1,k) (-1)**k (1-R)**(k+1) B(alpha+1, k+1) ].

    The value never exceeds |S^(N-1)|/(alpha+1), with equality exactly at N=1.
    """
    N, R, alpha = params.N, params.R, params.alpha
    total = 0.0
    if R > 0.0:
        total += R**N * _beta_int(alpha + 1.0, N)
    if R < 1.0:
        acc = 0.0
        for k in range(N):
            acc += math.comb(N - 1, k) * (-1.0) ** k * (1.0 - R) ** (k + 1) * _beta_int(
                alpha + 1.0, k + 1
            )
        total += acc
    return sphere_area(N) * total


def _beta_int(a, m):
    """B(a, m) for integer m >= 1 as an exact product (no log-Gamma noise)."""
    num = math.factorial(m - 1)
    den = 1.0
    for j in range(m):
        den *= a + j
    return num / den


def inner_shell_moment(params: ProblemParams, power):
    """Integral of (1 - r/R)**(alpha-1) r**power over (0, R), in closed form.

    Equals R**(power+1) Gamma(alpha) Gamma(power+1) / Gamma(alpha+power+1);
    requires alpha > 0 and power > -1.
    """
    if not params.alpha > 0:
        raise ValueError(f"inner_shell_moment requires alpha > 0, got {params.alpha!r}")
    if not power > -1.0:
        raise ValueError(f"inner_shell_moment requires power > -1, got {power!r}")
    R = params.R
    if R == 0.0:
        return 0.0
    ratio = gamma_ratio(params.alpha, power).exact
    return R ** (power + 1.0) * ratio * math.exp(log_gamma(power + 1.0))


@dataclass(frozen=True)
class GrowthConstants:
    """Closed-form constants governing the growth of the best constants.

    beta_exp     exponent N - 1 - (p+1)(N-2)/2 of the radial moment (> -1 for
                 subcritical p, N >= 3)
    kappa        constant in the symmetry-breaking condition (N >= 3)
    flux_upper   constant of the boundary-flux upper bound (N >= 2)
    flux_lower   constant of the boundary-flux lower bound (N >= 3; the N = 2
                 variant needs an extra regularity parameter, see
                 ``flux_lower_const_2d``)
    sphere_area  |S^(N-1)|
    """

    N: int
    p: float
    beta_exp: float
    kappa: float | None
    flux_upper: float
    flux_lower: float | None
    sphere_area: float


def growth_constants(N, p):
    """All closed-form constants for dimension N and exponent p.

    kappa and flux_lower contain (N-2) factors and exist only for N >= 3;
    they are None for N = 2.  The consistency identity

        kappa = (p+1)/2 * ((p-1)/(2(p+1)))**((p+1)/2) * flux_lower

    holds exactly and is pinned by the test suite.
    """
    N = check_dimension(N)
    if N < 2:
        raise ValueError(f"growth constants are defined for N >= 2, got N = {N}")
    p = check_exponent(N, p)
    area = sphere_area(N)
    beta_exp = N - 1.0 - (p + 1.0) * (N - 2.0) / 2.0
    flux_upper = area ** ((1.0 - p) / (p + 1.0)) * (2.0 * (p + 1.0) / (p - 1.0)) ** (
        2.0 * p / (p + 1.0)
    )
    if N == 2:
        return GrowthConstants(
            N=N, p=p, beta_exp=beta_exp, kappa=None, flux_upper=flux_upper,
            flux_lower=None, sphere_area=area,
        )
    gamma_b1 = math.exp(log_gamma(beta_exp + 1.0))
    kappa = (N - 2.0) ** (-(p + 1.0) / 2.0) * area ** ((1.0 - p) / 2.0) * gamma_b1
    flux_lower = (
        2.0 ** ((p + 3.0) / 2.0)
        * (p + 1.0) ** ((p - 1.0) / 2.0)
        * ((p - 1.0) * (N - 2.0)) ** (-(p + 1.0) / 2.0)
        * area ** ((1.0 - p) / 2.0)
        * gamma_b1
    )
    return GrowthConstants(
        N=N, p=p, beta_exp=beta_exp, kappa=kappa, flux_upper=flux_upper,
        flux_lower=flux_lower, sphere_area=area,
    )


def flux_lower_const_2d(p, eps):
    """Planar variant of the flux lower-bound constant and its moment exponent.

    The planar pointwise bound carries a |ln r|**(1/2) factor; absorbing it
    through ``power_log_sup`` costs a free parameter eps in (0, 2/(p+1)) and
    shifts the moment exponent to beta = 1 - (p+1) eps.  Returns the pair
    (constant, beta).
    """
    p = check_exponent(2, p)
    if not 0.0 < eps < 2.0 / (p + 1.0):
        raise ValueError(f"eps must lie in (0, 2/(p+1)) = (0, {2.0 / (p + 1.0)}), got {eps!r}")
    beta = 1.0 - (p + 1.0) * eps
    c_eps = power_log_sup(eps)
    const = (
        4.0
        * math.pi ** ((1.0 - p) / 2.0)
        * (p + 1.0) ** ((p - 1.0) / 2.0)
        * (p - 1.0) ** (-(p + 1.0) / 2.0)
        * math.exp(log_gamma(beta + 1.0))
        * c_eps ** (p + 1.0)
    )
    return const, beta


def breaking_radius(N, p, S):
    """Shell-radius threshold below which symmetry breaking is guaranteed.

        R0 = [ e**(-8/(p+1)) kappa**(-2/(p+1)) / S ] ** ((p+1)/(2N-(p+1)(N-2)))

    The outer exponent is positive by subcriticality; R0 is strictly
    decreasing in the Sobolev constant S.
    """
    consts = growth_constants(N, p)
    if consts.kappa is None:
        raise ValueError("breaking_radius requires N >= 3")
    if not S > 0:
        raise ValueError(f"breaking_radius requires S > 0, got {S!r}")
    p = consts.p
    denom = 2.0 * N - (p + 1.0) * (N - 2.0)
    if denom <= 0.0:
        raise ValueError("breaking_radius is undefined at the critical exponent")
    base = math.exp(-8.0 / (p + 1.0)) * consts.kappa ** (-2.0 / (p + 1.0)) / S
    return base ** ((p + 1.0) / denom)


def breaking_condition(params: ProblemParams, S):
    """Strict sufficient condition on (R, N, p) for symmetry breaking at large alpha.

        R**(2N/(p+1)-(N-2)) * min(e**(4/(R(p+1))), e**(4/((1-R)(p+1))))
            < kappa**(-2/(p+1)) / S

    Evaluated in log space (the exponentials overflow doubles for small R).
    Returns True at R = 0, False at R = 1.
    """
    consts = growth_constants(params.N, params.p)
    if consts.kappa is None:
        raise ValueError("breaking_condition requires N >= 3")
    if not S > 0:
        raise ValueError(f"breaking_condition requires S > 0, got {S!r}")
    R, p, N = params.R, consts.p, consts.N
    if R == 0.0:
        return True
    if R == 1.0:
        return False
    log_lhs = (2.0 * N / (p + 1.0) - (N - 2.0)) * math.log(R) + (4.0 / (p + 1.0)) * min(
        1.0 / R, 1.0 / (1.0 - R)
    )
    log_rhs = (-2.0 / (p + 1.0)) * math.log(consts.kappa) - math.log(S)
    return log_lhs < log_rhs


def sobolev_constant_lower_bound(N, p):
    """Closed-form lower bound for the subcritical Sobolev best constant.

        (N-2) |S^(N-1)|**((p-1)/(p+1)) Gamma(N-(p+1)(N-2)/2)**(-2/(p+1)) e**(-4/(p+1))

    which is kappa**(-2/(p+1)) e**(-4/(p+1)).
    """
    consts = growth_constants(N, p)
    if consts.kappa is None:
        raise ValueError("sobolev_constant_lower_bound requires N >= 3")
    return consts.kappa ** (-2.0 / (consts.p + 1.0)) * math.exp(-4.0 / (consts.p + 1.0))
