import numpy as np
import pytest

from henonshell import (
    BallGroundstateSolver,
    ProblemParams,
    RadialGroundstateSolver,
    concentration_track,
    continuity_in_R,
    fit_exponent,
    moving_shell,
    shooting_best_constant,
    sobolev_constant,
    sobolev_constant_lower_bound,
    sweep_alpha,
)
from henonshell.experiments import SweepRecord, solve_record

SMALL_RADIAL = RadialGroundstateSolver(n=257)
SMALL_BALL = BallGroundstateSolver(n_r=64, n_theta=24)


def synthetic_records(alphas, exponent, scale=3.0):
    rows = []
    for a in alphas:
        rec = SweepRecord(params=ProblemParams(N=3, p=2.0, R=0.0, alpha=float(a)))
        rec.S_rad = scale * float(a) ** exponent
        rows.append(rec)
    return rows


class TestFitExponent:
    def test_exact_power_law(self):
        fit = fit_exponent(synthetic_records([5, 10, 20, 40, 80, 160], 1.75), "S_rad")
        assert fit.slope == pytest.approx(1.75, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-10)

    def test_window_selection(self):
        records = synthetic_records([5, 10, 20, 40, 80, 160, 320], 2.0)
        fit = fit_exponent(records, "S_rad", window=(20, 320))
        assert fit.n_points == 5
        assert fit.slope == pytest.approx(2.0, abs=1e-12)

    def test_insufficient_data(self):
        with pytest.raises(ValueError):
            fit_exponent(synthetic_records([5, 10, 20, 40], 1.0), "S_rad")
        # rows without values do not count
        rows = synthetic_records([5, 10, 20, 40, 80], 1.0)
        rows[0].S_rad = None
        with pytest.raises(ValueError):
            fit_exponent(rows, "S_rad")


class TestSweep:
    def test_small_sweep_rows(self):
        template = ProblemParams(N=2, p=3.0, R=0.0, alpha=1.0)
        records = sweep_alpha(
            template, [5.0, 10.0, 20.0],
            radial_solver=SMALL_RADIAL, ball_solver=SMALL_BALL,
        )
        assert [r.alpha for r in records] == [5.0, 10.0, 20.0]
        for rec in records:
            assert rec.status == "ok"
            assert rec.gap == pytest.approx(rec.S_rad - rec.S_full, rel=1e-15)
            assert rec.scaled_S_rad == pytest.approx(
                rec.S_rad * rec.alpha ** (2.0 - 2.0 * 2.0 / 4.0 - 2.0), rel=1e-12
            )
            assert rec.A_over_B is not None and rec.A_over_B == 0.0  # R = 0

    def test_rows_independent_of_sweep_composition(self):
        template = ProblemParams(N=3, p=2.0, R=0.3, alpha=1.0)
        full = sweep_alpha(template, [4.0, 8.0], radial_solver=SMALL_RADIAL,
                           ball_solver=SMALL_BALL)
        single = solve_record(template.with_alpha(8.0),
                              SMALL_RADIAL.get_params(), SMALL_BALL.get_params())
        assert full[1].S_rad == single.S_rad
        assert full[1].S_full == single.S_full

    def test_row_failure_does_not_abort(self):
        template = ProblemParams(N=3, p=2.0, R=0.0, alpha=1.0)
        records = sweep_alpha(
            template, [5.0, 1e7],
            radial_solver=RadialGroundstateSolver(n=65, grading_strength=0.0),
            ball_solver=BallGroundstateSolver(n_r=32, n_theta=16, grading_strength=0.0),
        )
        assert records[0].status == "ok"
        assert records[1].status.startswith("error")
        assert records[1].S_rad is None

    def test_alphas_must_increase(self):
        with pytest.raises(ValueError):
            sweep_alpha(ProblemParams(N=3, p=2.0, R=0.0, alpha=1.0), [5.0, 5.0])

    def test_worker_pool_matches_sequential(self):
        template = ProblemParams(N=2, p=3.0, R=0.5, alpha=1.0)
        seq = sweep_alpha(template, [3.0, 6.0], radial_solver=SMALL_RADIAL,
                          ball_solver=SMALL_BALL, workers=1)
        par = sweep_alpha(template, [3.0, 6.0], radial_solver=SMALL_RADIAL,
                          ball_solver=SMALL_BALL, workers=2)
        for a, b in zip(seq, par):
            assert a.S_rad == b.S_rad and a.S_full == b.S_full


class TestSobolev:
    def test_matches_shooting_and_dominates_lower_bound(self):
        value = sobolev_constant(3, 2.0, n=1025)
        assert value == pytest.approx(shooting_best_constant(3, 2.0), rel=1e-5)
        assert value >= sobolev_constant_lower_bound(3, 2.0)

    def test_critical_exponent_rejected(self):
        with pytest.raises(ValueError):
            sobolev_constant(3, 5.0)


class TestMovingShell:
    def test_shell_radius_follows_the_power_law(self):
        records, first_broken = moving_shell(
            1.0, [10.0, 20.0], N=2, p=3.0,
            radial_solver=SMALL_RADIAL, ball_solver=SMALL_BALL,
        )
        assert [r.params.R for r in records] == [0.1, 0.05]
        assert first_broken in (10.0, 20.0, None)

    def test_large_delta_degenerates_to_pure_power_weight(self):
        records, _ = moving_shell(
            25.0, [8.0, 16.0], N=2, p=3.0,
            radial_solver=SMALL_RADIAL, ball_solver=SMALL_BALL,
        )
        henon = solve_record(ProblemParams(N=2, p=3.0, R=0.0, alpha=8.0),
                             SMALL_RADIAL.get_params(), SMALL_BALL.get_params())
        assert records[0].S_rad == pytest.approx(henon.S_rad, rel=1e-10)

    def test_delta_validation(self):
        with pytest.raises(ValueError):
            moving_shell(0.0, [5.0, 10.0])


class TestConcentrationTrack:
    def test_summary_fields(self):
        rows = []
        for a, s_peak, beta in ((10.0, 0.9, 50.0), (20.0, 0.95, 210.0), (40.0, 0.98, 900.0)):
            rec = SweepRecord(params=ProblemParams(N=3, p=2.0, R=0.2, alpha=a))
            rec.s_peak, rec.beta_peak = s_peak, beta
            rec.scaled_beta = beta * a ** (-2.0)
            rows.append(rec)
        summary = concentration_track(rows)
        assert summary.edge_distance == pytest.approx([0.1, 0.05, 0.02])
        assert summary.tail_min_edge_distance == pytest.approx(0.02)
        assert summary.tail_min_scaled_beta > 0.0

    def test_needs_converged_rows(self):
        rec = SweepRecord(params=ProblemParams(N=3, p=2.0, R=0.2, alpha=5.0), status="error: x")
        with pytest.raises(ValueError):
            concentration_track([rec])


class TestContinuity:
    def test_table_structure(self):
        table = continuity_in_R(
            5.0, [0.02, 0.01], endpoint=0.0, N=2, p=3.0, ball_solver=SMALL_BALL
        )
        assert table.endpoint == 0.0
        assert len(table.S_values) == 2
        assert np.all(table.deviations >= 0.0)
        assert table.deviations[-1] == abs(table.S_values[-1] - table.endpoint_value)

    def test_endpoint_validation(self):
        with pytest.raises(ValueError):
            continuity_in_R(5.0, [0.1], endpoint=0.5)
