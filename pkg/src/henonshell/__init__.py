"""Groundstates and best constants for Henon-type problems whose radial weight
vanishes on a spherical shell inside the unit ball.

The package computes the radial and the full (axisymmetric) best constants of
the Dirichlet-to-weighted-norm quotient, detects symmetry breaking between
them, verifies the closed-form identities and inequalities that control their
growth in the weight power, and reproduces the growth-rate and concentration
phenomena in parameter sweeps.
"""

from ._minimize import (
    DegenerateWeightError,
    NonConvergenceError,
    SolveOptions,
)
from .ball import (
    AxisymField,
    BallGroundstateSolver,
    BallResult,
    minimize_full_quotient,
    symmetry_gap,
    trial_upper_bound,
)
from .experiments import (
    ConcentrationSummary,
    ContinuityTable,
    ExponentFit,
    SweepRecord,
    concentration_track,
    continuity_in_R,
    fit_exponent,
    moving_shell,
    sobolev_constant,
    sweep_alpha,
)
from .grids import AxisymGrid, RadialGrid, build_axisym_grid, build_radial_grid
from .params import ProblemParams, critical_exponent
from .radial import (
    DiagnosticReport,
    RadialGroundstateSolver,
    RadialProfile,
    RadialResult,
    diagnostics,
    first_weighted_eigenvalue,
    minimize_radial_quotient,
)
from .shooting import shooting_best_constant
from .special import GammaRatio, beta_fn, gamma_ratio, log_gamma, power_log_sup
from .weight import (
    GrowthConstants,
    breaking_condition,
    breaking_radius,
    growth_constants,
    inner_shell_moment,
    shell_weight,
    shell_weight_derivative,
    shell_weight_integral,
    sobolev_constant_lower_bound,
    sphere_area,
)

__version__ = "0.1.0"

__all__ = [
    "AxisymField",
    "AxisymGrid",
    "BallGroundstateSolver",
    "BallResult",
    "ConcentrationSummary",
    "ContinuityTable",
    "DegenerateWeightError",
    "DiagnosticReport",
    "ExponentFit",
    "GammaRatio",
    "GrowthConstants",
    "NonConvergenceError",
    "ProblemParams",
    "RadialGrid",
    "RadialGroundstateSolver",
    "RadialProfile",
    "RadialResult",
    "SolveOptions",
    "SweepRecord",
    "beta_fn",
    "breaking_condition",
    "breaking_radius",
    "build_axisym_grid",
    "build_radial_grid",
    "concentration_track",
    "continuity_in_R",
    "critical_exponent",
    "diagnostics",
    "first_weighted_eigenvalue",
    "fit_exponent",
    "gamma_ratio",
    "growth_constants",
    "inner_shell_moment",
    "log_gamma",
    "minimize_full_quotient",
    "minimize_radial_quotient",
    "moving_shell",
    "power_log_sup",
    "shell_weight",
    "shell_weight_derivative",
    "shell_weight_integral",
    "shooting_best_constant",
    "sobolev_constant",
    "sobolev_constant_lower_bound",
    "sphere_area",
    "sweep_alpha",
    "symmetry_gap",
    "trial_upper_bound",
]
