import math

import numpy as np
import pytest

from henonshell import (
    ProblemParams,
    BallGroundstateSolver,
    SolveOptions,
    build_axisym_grid,
    build_radial_grid,
    minimize_full_quotient,
    minimize_radial_quotient,
    symmetry_gap,
    trial_upper_bound,
)
from henonshell.ball import _bump_energy_integrals, asymmetry_index

TIGHT = SolveOptions(quotient_tol=1e-13, grad_tol=1e-11, patience=15)


def pair(params, n_r=96, n_theta=32, opts=None):
    opts = opts or TIGHT
    rad = minimize_radial_quotient(params, build_radial_grid(params, n_r), opts)
    full = minimize_full_quotient(params, build_axisym_grid(params, n_r, n_theta), opts)
    return rad, full


class TestOrdering:
    @pytest.mark.parametrize(
        "params",
        [
            ProblemParams(N=3, p=2.0, R=0.0, alpha=5.0),
            ProblemParams(N=2, p=3.0, R=0.7, alpha=40.0),
            ProblemParams(N=3, p=2.0, R=0.3, alpha=40.0),
        ],
    )
    def test_full_never_exceeds_radial(self, params):
        rad, full = pair(params)
        assert full.S_full <= rad.S_rad * (1.0 + 1e-6)

    def test_interval_case_matches_radial(self):
        params = ProblemParams(N=1, p=3.0, R=0.3, alpha=8.0)
        rad = minimize_radial_quotient(params, build_radial_grid(params, 129), TIGHT)
        full = minimize_full_quotient(params, build_axisym_grid(params, 128, 16), TIGHT)
        assert full.S_full <= rad.S_rad * (1.0 + 1e-6)
        assert full.asym_index < 1e-6  # this instance stays even


class TestSymmetricRegime:
    @pytest.mark.parametrize("N,p", [(2, 3.0), (3, 2.0)])
    def test_boundary_vanishing_weight_keeps_radial_symmetry(self, N, p):
        params = ProblemParams(N=N, p=p, R=1.0, alpha=10.0)
        rad, full = pair(params, n_r=128, n_theta=48)
        assert abs(rad.S_rad - full.S_full) <= 1e-4 * rad.S_rad
        assert full.asym_index <= 1e-5
        gap, broken = symmetry_gap(rad, full)
        assert broken is False

    def test_constant_weight_stays_radial(self):
        params = ProblemParams(N=2, p=3.0, R=0.0, alpha=0.0)
        rad, full = pair(params, n_r=96, n_theta=32)
        assert full.asym_index <= 1e-5
        assert symmetry_gap(rad, full)[1] is False


class TestSymmetryBreaking:
    def test_planar_power_weight_breaks_at_large_alpha(self):
        params = ProblemParams(N=2, p=3.0, R=0.0, alpha=200.0)
        rad, full = pair(params, n_r=160, n_theta=96)
        gap, broken = symmetry_gap(rad, full)
        assert broken is True
        assert gap > 0.1 * rad.S_rad
        assert full.s_peak > 0.8  # boundary-point concentration

    def test_best_of_starts_never_worsens_with_extra_starts(self):
        params = ProblemParams(N=2, p=3.0, R=0.0, alpha=60.0)
        grid = build_axisym_grid(params, 96, 48)
        base = minimize_full_quotient(params, grid, SolveOptions(seed=7))
        more = minimize_full_quotient(
            params, grid, SolveOptions(seed=7, extra_random_starts=3)
        )
        assert more.S_full <= base.S_full * (1.0 + 1e-12)
        assert len(more.starts_log) == len(base.starts_log) + 3


class TestAsymmetryIndex:
    def test_zero_for_angle_independent_fields(self):
        params = ProblemParams(N=3, p=2.0, R=0.4, alpha=6.0)
        grid = build_axisym_grid(params, 64, 24)
        radial_field = np.broadcast_to(
            np.exp(-grid.r**2)[:, None], (grid.n_r, grid.n_theta)
        ).copy()
        radial_field[-1, :] = 0.0
        assert asymmetry_index(grid, radial_field) <= 1e-14

    def test_positive_for_asymmetric_fields(self):
        params = ProblemParams(N=3, p=2.0, R=0.4, alpha=6.0)
        grid = build_axisym_grid(params, 64, 24)
        field = np.outer(np.exp(-grid.r**2), 1.0 + 0.5 * np.cos(grid.theta))
        field[-1, :] = 0.0
        assert asymmetry_index(grid, field) > 0.05


class TestTrialUpperBound:
    def test_bounds_the_full_constant_from_above(self):
        for params in (
            ProblemParams(N=3, p=2.0, R=0.0, alpha=40.0),
            ProblemParams(N=2, p=3.0, R=0.5, alpha=60.0),
            ProblemParams(N=3, p=2.0, R=1.0, alpha=40.0),
        ):
            full = minimize_full_quotient(
                params, build_axisym_grid(params, 128, 48), TIGHT
            )
            assert trial_upper_bound(params) >= full.S_full * (1.0 - 1e-6)

    def test_doubling_alpha_scaling(self):
        N, p = 3, 2.0
        expo = 2.0 - N + 2.0 * N / (p + 1.0)
        for alpha in (40.0, 160.0):
            v1 = trial_upper_bound(ProblemParams(N=N, p=p, R=0.0, alpha=alpha))
            v2 = trial_upper_bound(ProblemParams(N=N, p=p, R=0.0, alpha=2.0 * alpha))
            assert v2 / v1 == pytest.approx(2.0**expo, rel=0.02)

    def test_scaled_value_below_exponential_envelope(self):
        N, p = 3, 2.0
        energy, lp = _bump_energy_integrals(N, p)
        S_omega = energy / lp ** (2.0 / (p + 1.0))
        alpha = 3000.0
        for R in (0.0, 0.5, 0.8):
            v = trial_upper_bound(ProblemParams(N=N, p=p, R=R, alpha=alpha))
            scaled = v * alpha ** (N - 2.0 - 2.0 * N / (p + 1.0))
            env = min(
                math.exp(4.0 / (R * (p + 1.0))) if R > 0 else math.inf,
                math.exp(4.0 / ((1.0 - R) * (p + 1.0))) if R < 1 else math.inf,
            )
            assert scaled <= env * S_omega * (1.0 + 0.05)

    def test_inadmissible_parameters_raise(self):
        with pytest.raises(ValueError):
            trial_upper_bound(ProblemParams(N=3, p=2.0, R=0.5, alpha=3.0))
        with pytest.raises(ValueError):
            trial_upper_bound(ProblemParams(N=3, p=2.0, R=0.0, alpha=40.0), bump_width=1.5)


class TestSymmetryGapContract:
    def test_gap_and_flag_follow_the_thresholds(self):
        from henonshell.ball import BallResult
        from henonshell.radial import RadialResult

        rad = RadialResult(
            params=None, S_rad=100.0, C_rad=None, profile=None,
            beta_peak=None, s_peak=None, residuals=None, info={},
        )

        def ball(S, asym):
            return BallResult(
                params=None, S_full=S, C_full=None, field=None,
                s_peak=0.0, beta_peak=0.0, asym_index=asym,
            )

        assert symmetry_gap(rad, ball(99.0, 0.5)) == (1.0, True)
        # large gap but radial-looking field: not flagged
        assert symmetry_gap(rad, ball(99.0, 1e-5))[1] is False
        # gap below threshold: not flagged even if the field looks asymmetric
        assert symmetry_gap(rad, ball(99.999, 0.5))[1] is False


class TestEstimator:
    def test_fit_exposes_results(self):
        solver = BallGroundstateSolver(n_r=64, n_theta=24)
        solver.fit(ProblemParams(N=3, p=2.0, R=0.0, alpha=5.0))
        assert solver.S_ > 0
        assert 0.0 <= solver.s_peak_ < 1.0
        assert solver.asym_index_ >= 0.0
        assert solver.result_.info["best_start"] in ("radial", "boundary_bump", "origin_bump")

    def test_get_params_round_trip(self):
        from sklearn.base import clone

        solver = BallGroundstateSolver(n_r=48, n_theta=20, extra_random_starts=2, seed=3)
        assert clone(solver).get_params() == solver.get_params()
