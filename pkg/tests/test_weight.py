import math

import numpy as np
import pytest
from scipy.integrate import quad

from henonshell import (
    ProblemParams,
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
from henonshell.special import log_gamma
from henonshell.weight import SingularDerivativeError, flux_lower_const_2d


def P(N=3, p=2.0, R=0.5, alpha=10.0):
    return ProblemParams(N=N, p=p, R=R, alpha=alpha)


class TestShellWeight:
    def test_zero_on_the_shell_and_one_at_the_edges(self):
        for R in (0.2, 0.5, 0.9):
            params = P(R=R, alpha=7.3)
            assert shell_weight(params, R) == 0.0
            assert shell_weight(params, 0.0) == 1.0
            assert shell_weight(params, 1.0) == 1.0

    def test_pure_power_endpoints(self):
        assert shell_weight(P(R=0.0, alpha=3.0), 0.5) == pytest.approx(0.125, rel=1e-15)
        assert shell_weight(P(R=1.0, alpha=2.0), 0.25) == pytest.approx(0.5625, rel=1e-15)

    def test_range_and_continuity(self):
        params = P(R=0.37, alpha=23.0)
        r = np.linspace(0.0, 1.0, 20001)
        v = shell_weight(params, r)
        assert np.all(v >= 0.0) and np.all(v <= 1.0)
        assert np.max(np.abs(np.diff(v))) < 0.02  # no jumps at the sampling scale

    def test_log_space_evaluation_for_large_alpha(self):
        params = P(R=0.0, alpha=200.0)
        assert shell_weight(params, 0.9) == pytest.approx(math.exp(200.0 * math.log(0.9)), rel=1e-12)
        # far below the underflow line the value flushes to exactly zero
        assert shell_weight(P(R=0.0, alpha=1e7), 0.5) == 0.0


class TestShellWeightDerivative:
    def test_interior_values(self):
        assert shell_weight_derivative(P(R=0.0, alpha=2.0), 0.5) == pytest.approx(1.0, rel=1e-14)
        assert shell_weight_derivative(P(R=1.0, alpha=1.0), 0.3) == pytest.approx(-1.0, rel=1e-14)

    def test_sign_pattern_around_the_shell(self):
        params = P(R=0.6, alpha=4.0)
        assert shell_weight_derivative(params, 0.3) < 0.0
        assert shell_weight_derivative(params, 0.8) > 0.0

    def test_kink_handling(self):
        assert shell_weight_derivative(P(R=0.5, alpha=2.5), 0.5) == 0.0
        with pytest.raises(SingularDerivativeError):
            shell_weight_derivative(P(R=0.5, alpha=0.5), 0.5)
        with pytest.raises(SingularDerivativeError) as err:
            shell_weight_derivative(P(R=0.5, alpha=1.0), 0.5)
        assert err.value.one_sided == (-2.0, 2.0)


class TestWeightIntegral:
    def test_dimension_one_exact(self):
        for R in (0.0, 0.3, 1.0):
            for alpha in (0.0, 1.0, 17.5, 400.0):
                params = ProblemParams(N=1, p=3.0, R=R, alpha=alpha)
                assert shell_weight_integral(params) == pytest.approx(
                    2.0 / (alpha + 1.0), rel=1e-14
                )

    def test_pure_power_three_dimensional(self):
        for alpha in (0.0, 2.0, 35.0):
            params = P(R=0.0, alpha=alpha)
            assert shell_weight_integral(params) == pytest.approx(
                4.0 * math.pi / (3.0 + alpha), rel=1e-13
            )

    def test_against_adaptive_quadrature(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            N = int(rng.integers(1, 6))
            params = ProblemParams(
                N=N, p=1.5, R=float(rng.uniform(0.0, 1.0)), alpha=float(rng.uniform(0.0, 200.0))
            )
            exact = shell_weight_integral(params)
            integrand = lambda r: shell_weight(params, r) * r ** (N - 1)
            num = 0.0
            for a, b in ((0.0, params.R), (params.R, 1.0)):
                if b > a:
                    num += quad(integrand, a, b, epsabs=1e-15, epsrel=1e-13, limit=800)[0]
            assert exact == pytest.approx(sphere_area(N) * num, rel=1e-10)

    def test_upper_bound_with_equality_only_in_dimension_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            N = int(rng.integers(1, 6))
            params = ProblemParams(
                N=N, p=1.5, R=float(rng.uniform(0.0, 1.0)), alpha=float(rng.uniform(0.0, 100.0))
            )
            bound = sphere_area(N) / (params.alpha + 1.0)
            value = shell_weight_integral(params)
            assert value <= bound * (1.0 + 1e-14)
            if N == 1:
                assert value == pytest.approx(bound, rel=1e-14)
            else:
                assert value < bound * (1.0 - 1e-4)


class TestInnerShellMoment:
    def test_alpha_one_reduces_to_power_integral(self):
        for R in (0.25, 0.8, 1.0):
            for beta in (-0.5, 0.0, 1.7):
                params = P(R=R, alpha=1.0)
                assert inner_shell_moment(params, beta) == pytest.approx(
                    R ** (beta + 1.0) / (beta + 1.0), rel=1e-13
                )

    def test_degenerate_and_exact_cases(self):
        assert inner_shell_moment(P(R=0.0, alpha=3.0), 1.0) == 0.0
        assert inner_shell_moment(P(R=1.0, alpha=2.0), 1.0) == pytest.approx(1.0 / 6.0, rel=1e-13)

    def test_against_quadrature(self):
        # QUADPACK's algebraic-weight rule resolves the r**beta endpoint
        # behavior that plain adaptive quadrature misses at steep alpha
        rng = np.random.default_rng(5)
        for _ in range(25):
            R = float(rng.uniform(0.05, 1.0))
            alpha = float(rng.uniform(1.0, 100.0))
            beta = float(rng.uniform(-0.9, 2.0))
            params = P(R=R, alpha=alpha)
            exact = inner_shell_moment(params, beta)
            num, _ = quad(
                lambda r: (1.0 - r / R) ** (alpha - 1.0), 0.0, R,
                weight="alg", wvar=(beta, 0.0), epsabs=1e-15, epsrel=1e-12, limit=400,
            )
            assert exact == pytest.approx(num, rel=1e-9)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            inner_shell_moment(P(alpha=0.0), 0.5)
        with pytest.raises(ValueError):
            inner_shell_moment(P(alpha=2.0), -1.0)


class TestGrowthConstants:
    def test_reference_values(self):
        c = growth_constants(3, 2.0)
        assert c.kappa == pytest.approx(0.25, rel=1e-13)
        assert c.beta_exp == pytest.approx(0.5, rel=1e-15)
        assert growth_constants(2, 3.0).sphere_area == pytest.approx(2.0 * math.pi, rel=1e-14)

    def test_consistency_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            N = int(rng.integers(3, 7))
            p_max = (N + 2.0) / (N - 2.0)
            p = float(rng.uniform(1.05, 0.999 * p_max))
            c = growth_constants(N, p)
            recon = (p + 1.0) / 2.0 * ((p - 1.0) / (2.0 * (p + 1.0))) ** ((p + 1.0) / 2.0) * c.flux_lower
            assert recon == pytest.approx(c.kappa, rel=1e-12)

    def test_planar_fields_are_none(self):
        c = growth_constants(2, 3.0)
        assert c.kappa is None and c.flux_lower is None
        assert c.flux_upper > 0.0

    def test_dimension_and_exponent_errors(self):
        with pytest.raises(ValueError):
            growth_constants(1, 3.0)
        with pytest.raises(ValueError):
            growth_constants(3, 5.0)  # critical exponent
        with pytest.raises(ValueError):
            growth_constants(3, 1.0)

    def test_planar_flux_lower_constant(self):
        const, beta = flux_lower_const_2d(3.0, eps=0.25)
        assert beta == pytest.approx(0.0, abs=1e-15)
        assert const > 0.0
        with pytest.raises(ValueError):
            flux_lower_const_2d(3.0, eps=0.6)  # outside (0, 2/(p+1))


class TestBreakingCondition:
    def test_radius_closed_form(self):
        S = 11.1444
        expected = math.exp(-8.0 / 3.0) * 4.0 ** (2.0 / 3.0) / S
        assert breaking_radius(3, 2.0, S) == pytest.approx(expected, rel=1e-12)

    def test_radius_decreasing_in_sobolev_constant(self):
        values = [breaking_radius(3, 2.0, S) for S in (5.0, 10.0, 20.0, 40.0)]
        assert all(b > a for a, b in zip(values[1:], values[:-1]))

    def test_condition_endpoints(self):
        S = 11.1444
        assert breaking_condition(P(R=0.0), S) is True
        assert breaking_condition(P(R=1.0 - 1e-9), S) is False

    def test_condition_holds_below_the_threshold_radius(self):
        S = 11.1444
        R0 = breaking_radius(3, 2.0, S)
        assert breaking_condition(P(R=0.9 * R0), S) is True

    def test_exponent_arithmetic(self):
        # the radius exponent in the condition for (N, p) = (3, 2)
        N, p = 3, 2.0
        assert 2.0 * N / (p + 1.0) - (N - 2.0) == pytest.approx(1.0)

    def test_min_exponential_bound(self):
        # compared in log space; the individual exponentials overflow doubles
        p = 2.0
        log_cap = 8.0 / (p + 1.0)
        for R in np.linspace(1e-3, 1.0 - 1e-3, 101):
            log_value = 4.0 / (p + 1.0) * min(1.0 / R, 1.0 / (1.0 - R))
            assert log_value <= log_cap * (1.0 + 1e-12)


class TestSobolevLowerBound:
    def test_reference_value(self):
        expected = (4.0 * math.pi) ** (1.0 / 3.0) * math.exp(log_gamma(1.5)) ** (-2.0 / 3.0) * math.exp(-4.0 / 3.0)
        assert sobolev_constant_lower_bound(3, 2.0) == pytest.approx(expected, rel=1e-13)

    def test_positive_on_admissible_range(self):
        for N in (3, 4, 5):
            p_max = (N + 2.0) / (N - 2.0)
            for p in np.linspace(1.1, 0.98 * p_max, 7):
                assert sobolev_constant_lower_bound(N, float(p)) > 0.0

    def test_needs_three_dimensions(self):
        with pytest.raises(ValueError):
            sobolev_constant_lower_bound(2, 3.0)
