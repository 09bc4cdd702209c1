import math

import numpy as np
import pytest

from henonshell import ProblemParams, build_axisym_grid, build_radial_grid
from henonshell.grids import radial_grid_from_nodes


def P(N=3, p=2.0, R=0.5, alpha=10.0):
    return ProblemParams(N=N, p=p, R=R, alpha=alpha)


class TestRadialGrid:
    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("alpha,R", [(0.0, 0.0), (10.0, 0.5), (300.0, 0.9)])
    def test_weights_sum_to_exact_moment(self, N, alpha, R):
        grid = build_radial_grid(ProblemParams(N=N, p=1.5, R=R, alpha=alpha), 257)
        assert float(np.sum(grid.measure_weights)) == pytest.approx(1.0 / N, rel=1e-12)

    def test_endpoints_and_monotonicity(self):
        grid = build_radial_grid(P(), 129)
        assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 1.0
        assert np.all(np.diff(grid.nodes) > 0.0)

    @pytest.mark.parametrize("R", [0.25, 0.5, 0.75])
    def test_shell_is_never_a_node(self, R):
        for n in (64, 65, 128, 301):
            grid = build_radial_grid(P(R=R), n)
            assert np.min(np.abs(grid.nodes - R)) > 0.0

    def test_doubling_n_halves_max_spacing(self):
        params = P(R=0.3, alpha=40.0)
        for n in (128, 256):
            coarse = np.max(np.diff(build_radial_grid(params, n).nodes))
            fine = np.max(np.diff(build_radial_grid(params, 2 * n).nodes))
            assert fine <= 0.6 * coarse

    def test_minimum_size_enforced(self):
        with pytest.raises(ValueError):
            build_radial_grid(P(), 8)

    def test_refined_grid_shares_density(self):
        grid = build_radial_grid(P(alpha=25.0), 65)
        fine = grid.refined()
        assert fine.n == 2 * grid.n - 1
        assert float(np.sum(fine.measure_weights)) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_rebuild_from_nodes(self):
        grid = build_radial_grid(P(), 65)
        rebuilt = radial_grid_from_nodes(grid.N, grid.nodes)
        assert np.array_equal(rebuilt.nodes, grid.nodes)
        assert np.allclose(rebuilt.measure_weights, grid.measure_weights, rtol=0, atol=0)


class TestAxisymGrid:
    def test_total_measure_is_ball_volume(self):
        for N, volume in ((2, math.pi), (3, 4.0 * math.pi / 3.0)):
            params = ProblemParams(N=N, p=2.0 if N == 3 else 3.0, R=0.4, alpha=15.0)
            grid = build_axisym_grid(params, 64, 32)
            assert grid.total_measure == pytest.approx(volume, rel=1e-10)

    def test_higher_dimension_measure(self):
        # |B^4| = pi^2/2 via the Gauss fallback for the angular moments
        params = ProblemParams(N=4, p=2.0, R=0.4, alpha=5.0)
        grid = build_axisym_grid(params, 48, 24)
        assert grid.total_measure == pytest.approx(math.pi**2 / 2.0, rel=1e-10)

    def test_interval_case(self):
        params = ProblemParams(N=1, p=3.0, R=0.5, alpha=8.0)
        grid = build_axisym_grid(params, 100, 16)
        assert grid.theta is None
        assert len(grid.r) == 2 * 100 + 1
        assert grid.r[0] == -1.0 and grid.r[-1] == 1.0
        assert np.allclose(grid.r, -grid.r[::-1])  # symmetric about the origin
        assert grid.total_measure == pytest.approx(2.0, rel=1e-12)

    def test_size_validation(self):
        with pytest.raises(ValueError):
            build_axisym_grid(P(), 16, 32)
        with pytest.raises(ValueError):
            build_axisym_grid(P(), 64, 8)

    def test_angular_grading_toggle(self):
        params = P(R=0.0, alpha=160.0)
        graded = build_axisym_grid(params, 64, 48, angular_grading=True)
        uniform = build_axisym_grid(params, 64, 48, angular_grading=False)
        assert np.min(np.diff(graded.theta)) < np.min(np.diff(uniform.theta))
        assert np.allclose(np.diff(uniform.theta), np.diff(uniform.theta)[0])
