import numpy as np
import pytest

from analysis import info_geom
from analysis.info_geom import TangentVector
from analysis.second_law import random_jacobian, random_potential
from core import measure as msr
from core.errors import PreconditionError, ValidationError
from core.symbolic import FiniteMemoryFunction, add, compose_shift, compose_shift_power, constant, subtract
from core.transfer import equilibrium


class TestTangentVectors:
    def test_projection_under_maximal_entropy(self, max_entropy):
        tangent = info_geom.tangent_project(max_entropy, FiniteMemoryFunction(2, 1, [1.0, 0.0]))
        np.testing.assert_allclose(tangent.xi.values, [0.5, -0.5], atol=1e-15)

    def test_projection_under_symmetric_chain(self, symmetric_chain):
        mu = msr.markov_invariant(symmetric_chain)
        tangent = info_geom.tangent_project(mu, FiniteMemoryFunction(2, 1, [1.0, 0.0]))
        np.testing.assert_allclose(tangent.xi.values, [0.3, 0.7, -0.7, -0.3], atol=1e-14)
        assert abs(msr.integrate(mu, tangent.xi)) < 1e-14

    def test_constants_project_to_zero(self, rng):
        mu = equilibrium(random_potential(rng, 3, 2))
        assert info_geom.tangent_project(mu, constant(3, 1.7)).xi.sup_norm() < 1e-11

    def test_projection_lands_in_kernel(self, rng):
        mu = equilibrium(random_potential(rng, 3, 2))
        tangent = info_geom.tangent_project(mu, random_potential(rng, 3, 3))
        assert abs(msr.integrate(mu, tangent.xi)) < 1e-12

    def test_rejects_non_tangent_direction(self, max_entropy):
        with pytest.raises(PreconditionError):
            TangentVector(max_entropy, FiniteMemoryFunction(2, 1, [1.0, 0.0]))

    def test_rejects_non_invariant_base(self, symmetric_chain, plus_minus):
        with pytest.raises(PreconditionError):
            info_geom.tangent_project(msr.markov_noninvariant(symmetric_chain, [0.9, 0.1]), plus_minus)


class TestAsymptoticVariance:
    def test_independent_symbols(self, max_entropy, plus_minus):
        assert info_geom.asymptotic_variance(max_entropy, plus_minus) == pytest.approx(1.0, abs=1e-14)

    def test_coboundary_has_no_variance(self, max_entropy):
        g = FiniteMemoryFunction(2, 1, [0.4, -1.1])
        assert abs(info_geom.asymptotic_variance(max_entropy, subtract(compose_shift(g), g))) < 1e-12

    def test_constant_has_no_variance(self, rng):
        mu = equilibrium(random_potential(rng, 2, 2))
        assert info_geom.asymptotic_variance(mu, constant(2, 3.0)) == pytest.approx(0.0, abs=1e-14)

    def test_correlated_chain(self, symmetric_chain, plus_minus):
        # ±1 spins under a symmetric chain: σ² = (1 + λ)/(1 − λ) with λ = .4
        mu = msr.markov_invariant(symmetric_chain)
        assert info_geom.asymptotic_variance(mu, plus_minus) == pytest.approx(1.4 / 0.6, rel=1e-12)

    def test_vanishing_intermediate_correlation(self, max_entropy, plus_minus):
        # ξ = s(x₁) + s(x₃): the lag-one correlation is zero, the lag-two one is 1
        xi = add(plus_minus, compose_shift_power(plus_minus, 2))
        np.testing.assert_array_equal(xi.values, [2.0, 0.0, 2.0, 0.0, 0.0, -2.0, 0.0, -2.0])
        assert info_geom.asymptotic_variance(max_entropy, xi) == pytest.approx(4.0, abs=1e-13)
        _, second = info_geom.pressure_derivatives(max_entropy.log_irn, xi)
        assert second == pytest.approx(4.0, rel=1e-5)

    def test_requires_invariant_measure(self, symmetric_chain, plus_minus):
        with pytest.raises(PreconditionError):
            info_geom.asymptotic_variance(msr.markov_noninvariant(symmetric_chain, [0.9, 0.1]), plus_minus)


class TestPressureDerivatives:
    def test_constant_direction(self, rng):
        first, second = info_geom.pressure_derivatives(random_jacobian(rng, 3, 2), constant(3, 0.8))
        assert first == pytest.approx(0.8, abs=1e-9)
        assert second == pytest.approx(0.0, abs=1e-6)

    def test_step_outside_range(self, uniform_jacobian, plus_minus):
        with pytest.raises(ValidationError):
            info_geom.pressure_derivatives(uniform_jacobian, plus_minus, h_step=0.5)
        with pytest.raises(ValidationError):
            info_geom.pressure_derivatives(uniform_jacobian, plus_minus, h_step=1e-6)


class TestFisherInformation:
    def test_maximal_entropy_direction(self, max_entropy, plus_minus):
        tangent = info_geom.tangent_project(max_entropy, plus_minus)
        assert info_geom.fisher_information(tangent) == pytest.approx(1.0, abs=1e-14)

    def test_scales_quadratically(self, max_entropy):
        tangent = info_geom.tangent_project(max_entropy, FiniteMemoryFunction(2, 1, [2.0, -2.0]))
        assert info_geom.fisher_information(tangent) == pytest.approx(4.0, abs=1e-13)

    def test_three_way_agreement(self, max_entropy, plus_minus):
        tangent = info_geom.tangent_project(max_entropy, plus_minus)
        _, second = info_geom.pressure_derivatives(max_entropy.log_irn, tangent.xi)
        assert second == pytest.approx(1.0, rel=1e-5)
        assert info_geom.asymptotic_variance(max_entropy, tangent.xi) == pytest.approx(1.0, abs=1e-13)

    def test_three_way_agreement_random(self, rng):
        for d, depth in [(2, 2), (3, 1), (3, 2)]:
            mu = equilibrium(random_potential(rng, d, depth))
            tangent = info_geom.tangent_project(mu, random_potential(rng, d, 2))
            fisher = info_geom.fisher_information(tangent)
            variance = info_geom.asymptotic_variance(mu, tangent.xi)
            _, second = info_geom.pressure_derivatives(mu.log_irn, tangent.xi)
            assert variance == pytest.approx(fisher, rel=1e-10)
            assert second == pytest.approx(fisher, rel=1e-4)

    def test_fisher_at_time_n(self, max_entropy, plus_minus):
        assert info_geom.fisher_at_time_n(max_entropy, plus_minus, 8) == pytest.approx(7.0, rel=1e-6)
        assert info_geom.fisher_at_time_n(max_entropy, plus_minus, 1) == pytest.approx(0.0, abs=1e-15)

    def test_fisher_at_time_n_range(self, max_entropy, plus_minus):
        for n in (0, 9):
            with pytest.raises(ValidationError):
                info_geom.fisher_at_time_n(max_entropy, plus_minus, n)


class TestKLTaylor:
    def test_log_cosh(self, max_entropy, plus_minus):
        table = info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [0.01])
        assert list(table.columns) == ["theta", "kl", "slope_pred", "curvature_pred", "second_moment_pred"]
        row = table.iloc[0]
        assert row["kl"] == pytest.approx(np.log(np.cosh(0.01)), abs=1e-14)
        assert row["kl"] == pytest.approx(0.5 * row["curvature_pred"] * 0.01 ** 2, rel=2e-5)
        assert row["slope_pred"] == pytest.approx(0.0, abs=1e-15)

    def test_fitted_curvature(self, max_entropy, plus_minus):
        table = info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, np.linspace(-0.05, 0.05, 11))
        slope, curvature = info_geom.fit_kl_quadratic(table)
        assert abs(slope) < 1e-8
        assert curvature == pytest.approx(table["curvature_pred"].iloc[0], rel=1e-2)

    def test_default_grid_fit(self, max_entropy, plus_minus):
        table = info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [-1e-2, -5e-3, 0.0, 5e-3, 1e-2])
        slope, curvature = info_geom.fit_kl_quadratic(table)
        assert abs(slope) < 1e-8
        assert curvature == pytest.approx(1.0, rel=1e-3)

    def test_second_moment_differs_off_tangent(self, symmetric_chain, plus_minus):
        mu = msr.markov_invariant(symmetric_chain)
        table = info_geom.kl_taylor(mu, mu, plus_minus, [-1e-2, -5e-3, 0.0, 5e-3, 1e-2])
        row = table.iloc[0]
        assert row["second_moment_pred"] == pytest.approx(1.0, abs=1e-14)
        assert row["curvature_pred"] == pytest.approx(1.4 / 0.6, rel=1e-12)
        _, curvature = info_geom.fit_kl_quadratic(table)
        assert curvature == pytest.approx(row["curvature_pred"], rel=1e-3)

    def test_second_moment_matches_on_tangent(self, max_entropy, plus_minus):
        row = info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [0.01]).iloc[0]
        assert row["second_moment_pred"] == pytest.approx(row["curvature_pred"], abs=1e-14)

    def test_cubic_remainder(self, max_entropy, plus_minus):
        # log cosh θ = θ²/2 − θ⁴/12 + ..., so C fitted at 1e-2 is about 1e-2/12
        constant_at_fit = info_geom.kl_cubic_constant(info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [1e-2]))
        assert constant_at_fit == pytest.approx(1e-2 / 12.0, rel=1e-2)
        row = info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [1e-3]).iloc[0]
        remainder = abs(row["kl"] - row["slope_pred"] * 1e-3 - 0.5 * row["curvature_pred"] * 1e-3 ** 2)
        assert remainder <= constant_at_fit * 1e-3 ** 3

    def test_cubic_remainder_ignores_zero_theta(self, max_entropy, plus_minus):
        assert info_geom.kl_cubic_constant(info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [0.0])) == 0.0

    def test_slope_with_distinct_measures(self, symmetric_chain, plus_minus, bernoulli_09):
        mu2 = msr.markov_invariant(symmetric_chain)
        table = info_geom.kl_taylor(bernoulli_09, mu2, plus_minus, np.linspace(-0.02, 0.02, 9))
        slope, _ = info_geom.fit_kl_quadratic(table)
        assert table["slope_pred"].iloc[0] == pytest.approx(-0.8, abs=1e-12)
        assert slope == pytest.approx(-0.8, rel=1e-3)

    def test_theta_range(self, max_entropy, plus_minus):
        with pytest.raises(ValidationError):
            info_geom.kl_taylor(max_entropy, max_entropy, plus_minus, [0.2])

    def test_needs_invariant_measures(self, symmetric_chain, max_entropy, plus_minus):
        with pytest.raises(PreconditionError):
            info_geom.kl_taylor(msr.markov_noninvariant(symmetric_chain, [0.9, 0.1]), max_entropy, plus_minus, [0.01])


class TestRelaxationSign:
    def test_reported_value(self, bernoulli_09, plus_minus):
        value, sign = info_geom.relaxation_sign(bernoulli_09, plus_minus)
        assert value == pytest.approx(-0.8, abs=1e-15)
        assert sign == -1
