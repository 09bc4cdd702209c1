"""Sweeps over the weight power, growth-exponent fits, and the structural
experiments: Sobolev-constant computation, the moving-shell regime, shell-
radius continuity, and concentration tracking.

A sweep row runs both solvers for one alpha, attaches the scaled quantities
whose large-alpha limits the growth estimates pin down, and never aborts the
sweep: failures are captured per row in the ``status`` field.  Rows are
embarrassingly parallel; with ``workers > 1`` they are farmed out to a
process pool and re-assembled in alpha order, so the output is identical to
the sequential one.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .ball import BallGroundstateSolver, symmetry_gap
from .params import ProblemParams
from .radial import RadialGroundstateSolver

__all__ = [
    "ConcentrationSummary",
    "ContinuityTable",
    "ExponentFit",
    "SweepRecord",
    "concentration_track",
    "continuity_in_R",
    "fit_exponent",
    "moving_shell",
    "sobolev_constant",
    "sweep_alpha",
]


@dataclass
class SweepRecord:
    """One (alpha, R) row of an experiment table."""

    params: ProblemParams
    status: str = "ok"
    S_rad: float | None = None
    S_full: float | None = None
    C_rad: float | None = None
    gap: float | None = None
    broken: bool | None = None
    s_peak: float | None = None
    beta_peak: float | None = None
    asym_index: float | None = None
    scaled_S_full: float | None = None
    scaled_S_rad: float | None = None
    scaled_beta: float | None = None
    A_over_B: float | None = None
    nehari_residual: float | None = None
    pohozaev_residual: float | None = None
    ni_violation: float | None = None
    lemma3_slack: float | None = None

    @property
    def alpha(self):
        return self.params.alpha


def _scaling_exponent(params):
    return params.N - 2.0 - 2.0 * params.N / (params.p + 1.0)


def solve_record(params, radial_kwargs=None, ball_kwargs=None, rel_tol=1e-4):
    """Run both solvers for one instance and assemble the record."""
    record = SweepRecord(params=params)
    try:
        radial = RadialGroundstateSolver(**(radial_kwargs or {})).fit(params)
        ball = BallGroundstateSolver(**(ball_kwargs or {})).fit(params)
    except Exception as err:  # captured per row, the sweep goes on
        record.status = f"error: {err}"
        return record

    res_r, res_b = radial.result_, ball.result_
    gap, broken = symmetry_gap(res_r, res_b, rel_tol=rel_tol)
    record.S_rad = res_r.S_rad
    record.S_full = res_b.S_full
    record.C_rad = res_r.C_rad
    record.gap = gap
    record.broken = broken
    record.s_peak = res_b.s_peak
    record.beta_peak = res_b.beta_peak
    record.asym_index = res_b.asym_index

    alpha, p = params.alpha, params.p
    if alpha > 0.0:
        expo = _scaling_exponent(params)
        record.scaled_S_full = res_b.S_full * alpha**expo
        record.scaled_S_rad = res_r.S_rad * alpha**expo
        record.scaled_beta = res_b.beta_peak * alpha ** (-2.0 / (p - 1.0))

    diag = res_r.residuals
    record.nehari_residual = diag.nehari_residual
    record.pohozaev_residual = diag.pohozaev_residual
    record.ni_violation = diag.ni_violation
    record.lemma3_slack = diag.lemma3_slack
    if diag.A_alpha is not None and diag.B_alpha not in (None, 0.0):
        record.A_over_B = diag.A_alpha / diag.B_alpha
    return record


def _solve_row(args):
    params, radial_kwargs, ball_kwargs, rel_tol = args
    return solve_record(params, radial_kwargs, ball_kwargs, rel_tol)


def _run_rows(rows, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_row, rows))
    return [_solve_row(row) for row in rows]


def sweep_alpha(template: ProblemParams, alphas, radial_solver=None, ball_solver=None,
                rel_tol=1e-4, workers=1):
    """One record per alpha (increasing), both solvers run per row.

    ``radial_solver`` and ``ball_solver`` are estimator templates; each row
    gets a clone, so solver state never leaks across rows.
    """
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    radial_kwargs = clone(radial_solver).get_params() if radial_solver else {}
    ball_kwargs = clone(ball_solver).get_params() if ball_solver else {}
    rows = [(template.with_alpha(a), radial_kwargs, ball_kwargs, rel_tol) for a in alphas]
    return _run_rows(rows, workers)


@dataclass
class ExponentFit:
    """Least-squares slope of ln(quantity) against ln(alpha)."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


def fit_exponent(records, quantity, window=None):
    """Fit a power law to one sweep column over an alpha window.

    ``quantity`` is a record attribute name (e.g. "S_rad", "beta_peak").
    Requires at least 5 usable rows (status ok, positive finite values).
    """
    lo, hi = window if window is not None else (-math.inf, math.inf)
    xs, ys = [], []
    for rec in records:
        if rec.status != "ok" or not lo <= rec.alpha <= hi:
            continue
        val = getattr(rec, quantity)
        if val is None or not np.isfinite(val) or val <= 0.0 or rec.alpha <= 0.0:
            continue
        xs.append(math.log(rec.alpha))
        ys.append(math.log(val))
    if len(xs) < 5:
        raise ValueError(
            f"exponent fit needs at least 5 positive records in the window, got {len(xs)}"
        )
    xs, ys = np.asarray(xs), np.asarray(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ExponentFit(
        slope=float(slope), intercept=float(intercept), r_squared=r_squared,
        window=(lo, hi), n_points=len(xs),
    )


def sobolev_constant(N, p, n=2049, solver=None):
    """Best constant of the unweighted subcritical embedding on the unit ball.

    The weight with R = 1 and alpha = 0 is identically one and the minimizer
    is radial, so one radial solve suffices.
    """
    template = solver if solver is not None else RadialGroundstateSolver(n=n)
    return clone(template).fit(ProblemParams(N=N, p=p, R=1.0, alpha=0.0)).S_


def moving_shell(delta, alphas, N=2, p=3.0, radial_solver=None, ball_solver=None,
                 rel_tol=1e-4, workers=1):
    """Sweep with the shell radius tied to alpha: R(alpha) = alpha**(-delta).

    Returns (records, first_broken_alpha); the latter is None when no row
    reports symmetry breaking.
    """
    if not delta > 0.0:
        raise ValueError(f"moving_shell needs delta > 0, got {delta!r}")
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    radial_kwargs = clone(radial_solver).get_params() if radial_solver else {}
    ball_kwargs = clone(ball_solver).get_params() if ball_solver else {}
    rows = []
    for a in alphas:
        R = min(max(a ** (-delta), 0.0), 1.0 - 1e-12)
        rows.append((ProblemParams(N=N, p=p, R=R, alpha=a), radial_kwargs, ball_kwargs, rel_tol))
    records = _run_rows(rows, workers)
    first_broken = next((r.alpha for r in records if r.broken), None)
    return records, first_broken


@dataclass
class ConcentrationSummary:
    """Peak-location and peak-height trends along a fixed-R sweep."""

    alphas: np.ndarray
    edge_distance: np.ndarray   # min(s_peak, 1 - s_peak) per row
    scaled_beta: np.ndarray
    tail_min_edge_distance: float
    tail_min_scaled_beta: float


def concentration_track(records):
    """Distance of the peak to {origin, boundary} and the scaled peak height.

    The tail statistics are taken over the upper half of the alpha range; the
    scaled peak height staying bounded below is the observable form of the
    growth hypothesis under which concentration is confined to the origin or
    the boundary.
    """
    rows = [r for r in records if r.status == "ok"]
    if not rows:
        raise ValueError("concentration_track needs at least one converged record")
    alphas = np.array([r.alpha for r in rows])
    edge = np.array([min(r.s_peak, 1.0 - r.s_peak) for r in rows])
    scaled = np.array([r.scaled_beta if r.scaled_beta is not None else np.nan for r in rows])
    tail = alphas >= np.median(alphas)
    return ConcentrationSummary(
        alphas=alphas,
        edge_distance=edge,
        scaled_beta=scaled,
        tail_min_edge_distance=float(np.min(edge[tail])),
        tail_min_scaled_beta=float(np.nanmin(scaled[tail])) if np.any(tail) else math.nan,
    )


@dataclass
class ContinuityTable:
    """Best-constant values along a shell-radius list approaching an endpoint."""

    endpoint: float
    endpoint_value: float
    R_values: np.ndarray
    S_values: np.ndarray
    deviations: np.ndarray

    rows: list = field(default_factory=list)


def continuity_in_R(alpha, R_list, endpoint, N=3, p=2.0, ball_solver=None, workers=1):
    """Full best constant along R -> endpoint, against the endpoint instance.

    ``endpoint`` must be 0.0 or 1.0.  Deviations |S(R) - S(endpoint)| are
    reported in order; no decay rate is asserted here, only measured.
    """
    if endpoint not in (0.0, 1.0):
        raise ValueError(f"endpoint must be 0.0 or 1.0, got {endpoint!r}")
    ball_kwargs = clone(ball_solver).get_params() if ball_solver else {}
    all_R = list(R_list) + [endpoint]
    rows = [
        (ProblemParams(N=N, p=p, R=float(R), alpha=float(alpha)), {}, ball_kwargs, 1e-4)
        for R in all_R
    ]
    # radial solve is not needed here; run the ball solver directly per row
    results = []
    for params, _, bk, _ in rows:
        solver = BallGroundstateSolver(**bk)
        results.append(solver.fit(params).result_)
    S_values = np.array([res.S_full for res in results])
    endpoint_value = float(S_values[-1])
    S_values = S_values[:-1]
    R_values = np.array([float(R) for R in R_list])
    deviations = np.abs(S_values - endpoint_value)
    return ContinuityTable(
        endpoint=float(endpoint),
        endpoint_value=endpoint_value,
        R_values=R_values,
        S_values=S_values,
        deviations=deviations,
        rows=[{"R": float(r), "S_full": float(s)} for r, s in zip(R_values, S_values)],
    )
