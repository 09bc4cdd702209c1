"""Least-energy radial profiles, the radial best constant, and diagnostics.

The radial quotient is discretized with piecewise-linear elements on a graded
grid.  The Dirichlet energy uses exact cell moments of r**(N-1), so it is the
exact energy of the interpolant; weighted norms are evaluated by per-cell
Gauss quadrature of the interpolant.  The discrete problem is therefore a
Galerkin restriction up to negligible quadrature noise, and the discrete best
constant can only decrease under nested grid refinement.

The minimizer returns the optimizer normalized to unit weighted norm; the
solution of the boundary value problem itself is the rescaling by the
(p-1)-th root of the best constant.  Every converged profile is run through
the identity and inequality checks that pin the growth of the energy level:
the Nehari identity, the scaling (Pohozaev) identity with the boundary flux
from a one-sided difference, the pointwise radial decay bound, and the three
boundary-flux estimates whose constants live in ``weight``.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator

from ._minimize import SolveOptions, minimize_quotient
from .grids import RadialGrid, build_radial_grid
from .params import ProblemParams
from .special import log_gamma
from .weight import (
    flux_lower_const_2d,
    growth_constants,
    radial_weight_derivative_times_r,
    shell_weight,
    sphere_area,
)

__all__ = [
    "DiagnosticReport",
    "RadialGroundstateSolver",
    "RadialProfile",
    "RadialResult",
    "diagnostics",
    "first_weighted_eigenvalue",
    "minimize_radial_quotient",
]

GAUSS_POINTS = 4
PLANAR_EPS = None  # sentinel: diagnostics default is eps = 1/(p+1)


def radial_stiffness(grid: RadialGrid):
    """Tridiagonal stiffness for the full-ball Dirichlet energy (interior dofs).

    Row/column n-1 (the boundary node) is eliminated; the origin keeps its
    natural (even-reflection) condition.
    """
    area = sphere_area(grid.N)
    h = np.diff(grid.nodes)
    c = area * grid.cell_moments / h**2
    n_int = grid.n - 1
    main = np.zeros(n_int)
    main[:-1] += c[:-1]  # left endpoints of cells 0..n-3
    main[1:] += c[:-1]   # right endpoints of cells 0..n-3
    main[-1] += c[-1]    # last cell; its boundary endpoint is eliminated
    off = -c[:-1]
    return sp.diags([off, main, off], offsets=[-1, 0, 1], format="csc")


def gauss_points(grid: RadialGrid, n_points=GAUSS_POINTS):
    """Per-cell Gauss nodes, jacobian weights, and the interpolation matrix.

    Returns (rq, jac, P) with rq the flattened quadrature radii, jac the
    corresponding dr-weights, and P the sparse map from nodal values to
    quadrature-point values of the piecewise-linear interpolant.
    """
    x, w = np.polynomial.legendre.leggauss(n_points)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    a, b = grid.nodes[:-1], grid.nodes[1:]
    h = b - a
    rq = (a[:, None] + h[:, None] * t[None, :]).ravel()
    jac = (h[:, None] * wt[None, :]).ravel()
    n_cells = len(a)
    rows = np.repeat(np.arange(n_cells * n_points), 2)
    left = np.repeat(np.arange(n_cells), n_points)
    cols = np.empty(2 * n_cells * n_points, dtype=int)
    cols[0::2] = left
    cols[1::2] = left + 1
    vals = np.empty(2 * n_cells * n_points)
    vals[0::2] = np.tile(1.0 - t, n_cells)
    vals[1::2] = np.tile(t, n_cells)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n_cells * n_points, grid.n))
    return rq, jac, P


def weighted_rule(params: ProblemParams, grid: RadialGrid):
    """Quadrature (P, gw) for integral V(|x|) f over the ball, f nodal."""
    rq, jac, P = gauss_points(grid)
    gw = sphere_area(grid.N) * jac * shell_weight(params, rq) * rq ** (grid.N - 1)
    return P, gw


def radial_energy(grid: RadialGrid, values):
    """Exact Dirichlet energy of the piecewise-linear interpolant (full ball)."""
    du = np.diff(values) / np.diff(grid.nodes)
    return sphere_area(grid.N) * float(grid.cell_moments @ du**2)


def weighted_norm(params: ProblemParams, grid: RadialGrid, values, power):
    """Integral of V |u|**power over the ball for a nodal profile."""
    rq, jac, P = gauss_points(grid)
    gw = sphere_area(grid.N) * jac * shell_weight(params, rq) * rq ** (grid.N - 1)
    return float(gw @ np.abs(P @ values) ** power)


def boundary_derivative(grid: RadialGrid, values):
    """u'(1) from the quadratic through the last three nodes (one-sided, order 2)."""
    x0, x1, x2 = grid.nodes[-3:]
    f0, f1, f2 = values[-3:]
    return (
        f0 * (x2 - x1) / ((x0 - x1) * (x0 - x2))
        + f1 * (x2 - x0) / ((x1 - x0) * (x1 - x2))
        + f2 * (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1))
    )


@dataclass
class RadialProfile:
    """Nodal values of a Dirichlet radial function; the boundary value is exact 0."""

    grid: RadialGrid
    values: np.ndarray


@dataclass
class DiagnosticReport:
    """Residuals of the identities and slacks of the inequalities (>= 0 is good).

    Fields that require N >= 3 (the pointwise decay bound, the flux lower
    bound with its dimensional constant) are None when undefined; planar
    results use the log-corrected constant with the default regularity
    parameter eps = 1/(p+1).
    """

    nehari_residual: float
    pohozaev_residual: float
    boundary_flux: float
    ni_violation: float | None
    lemma1_slack: float | None
    lemma2_slack: float | None
    lemma3_slack: float | None
    A_alpha: float | None
    B_alpha: float | None


@dataclass
class RadialResult:
    """Converged radial solve: best constant, energy level, rescaled profile."""

    params: ProblemParams
    S_rad: float
    C_rad: float
    profile: RadialProfile
    beta_peak: float
    s_peak: float
    residuals: DiagnosticReport
    info: dict


def _initial_bump(params: ProblemParams, nodes):
    """Smooth positive start centered in the expected concentration zone."""
    a = max(params.alpha, 2.0)
    center = 0.0 if params.R >= 0.5 else 1.0 - 1.0 / a
    width = max(1.0 / a, 0.05)
    return np.exp(-((nodes - center) ** 2) / (2.0 * width**2))


def minimize_radial_quotient(params: ProblemParams, grid: RadialGrid, opts=None):
    """Discrete minimizer of the radial quotient, rescaled to solve the PDE.

    Requires p > 1 (for p = 1 use ``first_weighted_eigenvalue``).  The result
    carries the best constant S_rad, the energy level C_rad obtained by
    inverting the power relation between the two, the rescaled profile, its
    peak data, and the diagnostic report.
    """
    if params.is_eigenproblem:
        raise ValueError(
            "p = 1 defines an eigenvalue problem; use first_weighted_eigenvalue"
        )
    opts = opts or SolveOptions()
    A = radial_stiffness(grid)
    P, gw = weighted_rule(params, grid)
    u0 = _initial_bump(params, grid.nodes[:-1])
    u, S, info = minimize_quotient(A, P[:, :-1].tocsr(), gw, params.p, u0, opts)

    p = params.p
    values = np.concatenate([S ** (1.0 / (p - 1.0)) * u, [0.0]])
    profile = RadialProfile(grid=grid, values=values)
    C_rad = (p - 1.0) / (2.0 * (p + 1.0)) * S ** ((p + 1.0) / (p - 1.0))
    i_peak = int(np.argmax(values))
    result = RadialResult(
        params=params,
        S_rad=S,
        C_rad=C_rad,
        profile=profile,
        beta_peak=float(values[i_peak]),
        s_peak=float(grid.nodes[i_peak]),
        residuals=None,
        info=info,
    )
    result.residuals = diagnostics(params, result)
    return result


def first_weighted_eigenvalue(params: ProblemParams, grid: RadialGrid, opts=None):
    """First eigenvalue of the weighted radial Rayleigh quotient (R = 1, p = 1).

    At p = 1 the quotient is homogeneous of degree zero, the rescaling that
    turns optimizers into PDE solutions is unavailable, and the minimizer is
    plain inverse iteration for the pencil (stiffness, weighted mass).
    """
    if params.R != 1.0 or params.p != 1.0:
        raise ValueError(
            f"the eigenvalue path needs R = 1 and p = 1, got R = {params.R}, p = {params.p}"
        )
    opts = opts or SolveOptions()
    A = radial_stiffness(grid)
    P, gw = weighted_rule(params, grid)
    u0 = _initial_bump(params, grid.nodes[:-1])
    _, lam, _ = minimize_quotient(A, P[:, :-1].tocsr(), gw, 1.0, u0, opts)
    return lam


def diagnostics(params: ProblemParams, result: RadialResult):
    """Identity residuals and inequality slacks for a converged radial result.

    All integrals are recomputed from the stored profile, so the report is
    meaningful for round-tripped results as well.
    """
    grid, u = result.profile.grid, result.profile.values
    N, p, alpha = params.N, params.p, params.alpha
    area = sphere_area(N)

    energy = radial_energy(grid, u)
    rq, jac, P = gauss_points(grid)
    uq = np.abs(P @ u)
    meas = area * jac * rq ** (N - 1)
    weighted = float((meas * shell_weight(params, rq)) @ uq ** (p + 1.0))
    nehari_target = 2.0 * (p + 1.0) / (p - 1.0) * result.C_rad
    nehari_residual = abs(weighted - nehari_target) / nehari_target

    flux = area * boundary_derivative(grid, u) ** 2
    rvp = radial_weight_derivative_times_r(params, rq)
    scaling_term = float((meas * rvp) @ uq ** (p + 1.0))
    rhs = (2.0 * N / (p + 1.0) - (N - 2.0)) * weighted + 2.0 / (p + 1.0) * scaling_term
    pohozaev_residual = abs(flux - rhs) / max(abs(flux), abs(rhs))

    ni_violation = None
    if N >= 3:
        r = grid.nodes[1:]
        bound = math.sqrt(energy / (area * (N - 2.0))) * r ** (-(N - 2.0) / 2.0)
        ni_violation = float(max(0.0, np.max(np.abs(u[1:]) - bound)))

    lemma1_slack = lemma2_slack = lemma3_slack = A_alpha = B_alpha = None
    if N >= 2:
        C = result.C_rad
        if N >= 3:
            consts = growth_constants(N, p)
            k_low, beta = consts.flux_lower, consts.beta_exp
            k_up = consts.flux_upper
        else:
            k_up = growth_constants(N, p).flux_upper
            k_low, beta = flux_lower_const_2d(p, eps=1.0 / (p + 1.0))
        B_alpha = k_up * C ** (2.0 * p / (p + 1.0)) / (alpha + 1.0) ** (2.0 / (p + 1.0))
        # alpha * Gamma(alpha) / Gamma(alpha + beta + 1), stable down to alpha = 0
        ratio = math.exp(log_gamma(alpha + 1.0) - log_gamma(alpha + beta + 1.0))
        A_alpha = k_low * params.R ** (beta + 1.0) * ratio * C ** ((p + 1.0) / 2.0)
        growth = (2.0 * (N + alpha) / (p + 1.0) - (N - 2.0)) * 2.0 * (p + 1.0) / (p - 1.0) * C
        lemma1_slack = B_alpha - flux
        lemma2_slack = flux - (growth - A_alpha)
        lemma3_slack = A_alpha + B_alpha - growth

    return DiagnosticReport(
        nehari_residual=nehari_residual,
        pohozaev_residual=pohozaev_residual,
        boundary_flux=flux,
        ni_violation=ni_violation,
        lemma1_slack=lemma1_slack,
        lemma2_slack=lemma2_slack,
        lemma3_slack=lemma3_slack,
        A_alpha=A_alpha,
        B_alpha=B_alpha,
    )


class RadialGroundstateSolver(BaseEstimator):
    """Estimator wrapper around the radial quotient minimizer.

    Hyperparameters are the grid size/grading and the iteration controls;
    ``fit`` takes one problem instance and exposes the solve through fitted
    attributes (S_, C_, profile_, diagnostics_, result_).  p = 1 instances
    are solved as eigenvalue problems and fill eigenvalue_ instead.
    """

    def __init__(self, n=1025, grading_strength=1.0, max_iter=200_000,
                 quotient_tol=1e-10, grad_tol=1e-9, patience=10, seed=0):
        self.n = n
        self.grading_strength = grading_strength
        self.max_iter = max_iter
        self.quotient_tol = quotient_tol
        self.grad_tol = grad_tol
        self.patience = patience
        self.seed = seed

    def _options(self):
        return SolveOptions(
            max_iter=self.max_iter,
            quotient_tol=self.quotient_tol,
            grad_tol=self.grad_tol,
            patience=self.patience,
            seed=self.seed,
        )

    def fit(self, problem, y=None):
        params = problem if isinstance(problem, ProblemParams) else ProblemParams(*problem)
        self.problem_ = params
        self.grid_ = build_radial_grid(params, self.n, self.grading_strength)
        if params.is_eigenproblem:
            self.eigenvalue_ = first_weighted_eigenvalue(params, self.grid_, self._options())
            self.S_ = self.eigenvalue_
            self.result_ = None
            return self
        self.result_ = minimize_radial_quotient(params, self.grid_, self._options())
        self.S_ = self.result_.S_rad
        self.C_ = self.result_.C_rad
        self.profile_ = self.result_.profile
        self.diagnostics_ = self.result_.residuals
        self.n_iter_ = self.result_.info["iterations"]
        return self
